#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "speclab/assembly.hpp"
#include "speclab/errors.hpp"

using namespace speclab;

TEST_CASE("single right triangle") {
  Mesh m;
  m.spec = make_unit_square();
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.tris = {{0, 1, 2}};
  m.flags.assign(3, NodeFlag::Free);
  m.kinds.assign(3, NodeKind::Interior);
  m.elementArea = {0.5};
  m.hMax = std::sqrt(2.0);
  const CsrMatrix K = assemble_stiffness(m);
  // Hand values: gradients (-1,-1), (1,0), (0,1), area 1/2.
  CHECK(K.at(0, 0) == doctest::Approx(1.0));
  CHECK(K.at(1, 1) == doctest::Approx(0.5));
  CHECK(K.at(0, 1) == doctest::Approx(-0.5));
  CHECK(K.at(1, 2) == doctest::Approx(0.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(K.at(i, 0) + K.at(i, 1) + K.at(i, 2)) < 1e-15);
  const CsrMatrix M = assemble_mass(m);
  CHECK(M.at(0, 0) == doctest::Approx(1.0 / 12));
  CHECK(M.at(0, 1) == doctest::Approx(1.0 / 24));

  m.tris = {{0, 2, 1}};
  CHECK_THROWS_AS(assemble_stiffness(m), AssemblyError);
}

TEST_CASE("kernel, partition of unity and symmetry") {
  for (const auto& spec : {make_dumbbell_dirichlet(0.4, 0.2, 0.5), make_comb(4, 0.5, 0.5), make_neumann_dumbbell(0.1, 0.1)}) {
    const Mesh m = triangulate(spec, 0.025);
    const CsrMatrix K = assemble_stiffness(m);
    const CsrMatrix M = assemble_mass(m);
    const std::vector<double> ones(m.num_nodes(), 1.0);
    const auto k1 = K * ones;
    double kmax = 0.0;
    for (double v : k1) kmax = std::max(kmax, std::abs(v));
    CHECK(kmax < 1e-12);
    CHECK(dot(ones, M * ones) == doctest::Approx(area(spec)).epsilon(1e-12));
    CHECK(K.asymmetry() < 1e-14);
    CHECK(M.asymmetry() < 1e-14);
  }
}

TEST_CASE("dirichlet reduction") {
  const Mesh m = triangulate(make_unit_square(), 0.5);
  const ReducedSystem r = assemble_reduced(m);
  CHECK(r.dofs.num_dofs() == 1);
  CHECK(r.K.n == 1);
  // Centre node of the 2x2 grid lies in all 8 triangles (A = 1/8), each with
  // its 45 degree corner there: K = 8 * 4A, M = 8 * 2A/12, load = 8 * A/3.
  CHECK(r.K.at(0, 0) == doctest::Approx(4.0));
  CHECK(r.M.at(0, 0) == doctest::Approx(1.0 / 6));
  CHECK(r.load[0] == doctest::Approx(1.0 / 3));

  const Mesh n = triangulate(make_unit_square(BoundaryCondition::Neumann), 0.25);
  const ReducedSystem rn = assemble_reduced(n);
  CHECK(rn.dofs.num_dofs() == n.num_nodes());
  for (std::size_t i = 0; i < n.num_nodes(); ++i) CHECK(rn.dofs.dofToNode[i] == int(i));

  Mesh empty = m;
  empty.nodes.resize(0);
  CHECK_THROWS(apply_dirichlet(assemble_stiffness(m), assemble_mass(m), empty));
}

TEST_CASE("matrix market output") {
  const ReducedSystem r = assemble_reduced(triangulate(make_unit_square(), 0.25));
  std::ostringstream os;
  write_matrix_market(r.K, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  std::size_t rows, cols, nnz;
  is >> rows >> cols >> nnz;
  CHECK(rows == 9);
  CHECK(nnz == (r.K.nnz() + 9) / 2);
}
