#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "speclab/errors.hpp"
#include "speclab/solve.hpp"
#include "oracles.hpp"

using namespace speclab;

namespace {

constexpr double pi = std::numbers::pi;

void check_contract(const EigenResult& r, const ReducedSystem& sys, double tol) {
  for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK(r.eigenvalues[i] <= r.eigenvalues[i + 1]);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r.residuals[i] <= tol * std::max(1.0, std::abs(r.eigenvalues[i])));
    const auto ui = sys.dofs.restrict_to_dofs(r.vectors[i]);
    const auto mui = sys.M * ui;
    CHECK(dot(sys.load, ui) >= -1e-8);
    for (std::size_t j = 0; j <= i; ++j) {
      const auto uj = sys.dofs.restrict_to_dofs(r.vectors[j]);
      CHECK(std::abs(dot(uj, mui) - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

}  // namespace

TEST_CASE("series oracles") {
  CHECK(oracle::square_rigidity_series() == doctest::Approx(0.0351442).epsilon(1e-5));
  CHECK(oracle::square_centre_series() == doctest::Approx(0.0736713).epsilon(1e-5));
}

TEST_CASE("unit square Dirichlet spectrum") {
  const Mesh m = triangulate(make_unit_square(), 1.0 / 64);
  const ReducedSystem sys = assemble_reduced(m);
  const EigenResult r = smallest_eigenpairs(sys, 6);
  check_contract(r, sys, 1e-9);
  CHECK(r.eigenvalues[0] == doctest::Approx(2 * pi * pi).epsilon(2e-3));
  CHECK(r.eigenvalues[0] > 2 * pi * pi);
  CHECK(r.eigenvalues[1] == doctest::Approx(5 * pi * pi).epsilon(5e-3));
  CHECK(r.eigenvalues[2] == doctest::Approx(5 * pi * pi).epsilon(5e-3));
  CHECK(r.multiplicityGapFlag[1]);
  CHECK_FALSE(r.multiplicityGapFlag[0]);
  CHECK(r.eigenvalues[3] == doctest::Approx(8 * pi * pi).epsilon(1e-2));
}

TEST_CASE("O(h^2) convergence from above on R_eps") {
  const double exact = pi * pi / 4 * (0.16 + 6.25);
  CHECK(exact == doctest::Approx(15.8162).epsilon(1e-5));
  Mesh m = triangulate(make_r_eps(0.4), 0.05);
  double prevErr = 0.0;
  for (int level = 0; level < 3; ++level) {
    const ReducedSystem sys = assemble_reduced(m);
    const auto r = smallest_eigenpairs(sys, 1);
    const double err = (r.eigenvalues[0] - exact) / exact;
    CHECK(err > 0.0);
    if (level > 0) {
      CHECK(err < prevErr);
      CHECK(prevErr / err == doctest::Approx(4.0).epsilon(0.1));
    }
    prevErr = err;
    m = refine(m);
  }
}

TEST_CASE("Neumann unit square") {
  const Mesh m = triangulate(make_unit_square(BoundaryCondition::Neumann), 1.0 / 40);
  const ReducedSystem sys = assemble_reduced(m);
  const EigenResult r = smallest_eigenpairs(sys, 4);
  check_contract(r, sys, 1e-9);
  CHECK(std::abs(r.eigenvalues[0]) < 1e-8);
  CHECK(r.eigenvalues[1] == doctest::Approx(pi * pi).epsilon(2e-3));
  CHECK(r.eigenvalues[2] == doctest::Approx(pi * pi).epsilon(2e-3));
  CHECK(r.multiplicityGapFlag[1]);
  // Constant mode.
  const auto& u0 = r.vectors[0];
  for (double v : u0) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("domain monotonicity on nested rectangles") {
  const auto inner = smallest_eigenpairs(assemble_reduced(triangulate(make_rectangle(0, 1, 0, 0.5), 1.0 / 32)), 1);
  const auto outer = smallest_eigenpairs(assemble_reduced(triangulate(make_rectangle(0, 1, 0, 0.75), 1.0 / 32)), 1);
  CHECK(inner.eigenvalues[0] >= outer.eigenvalues[0]);
}

TEST_CASE("determinism") {
  const ReducedSystem sys = assemble_reduced(triangulate(make_dumbbell_dirichlet(0.4, 0.2, 0.5), 0.05));
  const auto a = smallest_eigenpairs(sys, 3);
  const auto b = smallest_eigenpairs(sys, 3);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("error paths") {
  const ReducedSystem tiny = assemble_reduced(triangulate(make_unit_square(), 0.5));
  CHECK_THROWS_AS(smallest_eigenpairs(tiny, 2), SolverError);
  const auto one = smallest_eigenpairs(tiny, 1);
  CHECK(one.eigenvalues[0] == doctest::Approx(24.0));
  const ReducedSystem sys = assemble_reduced(triangulate(make_unit_square(), 1.0 / 32));
  EigenOptions capped;
  capped.maxIterations = 5;
  capped.tol = 1e-12;
  try {
    smallest_eigenpairs(sys, 10, capped);
    CHECK(false);
  } catch (const SolverError& e) {
    CHECK_FALSE(e.residuals().empty());
  }
}

TEST_CASE("torsion on the unit square") {
  const double T = oracle::square_rigidity_series(), vc = oracle::square_centre_series();
  double prevErr = 1.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const Mesh m = triangulate(make_unit_square(), h);
    const ReducedSystem sys = assemble_reduced(m);
    const TorsionResult t = solve_torsion(sys, m);
    for (double v : t.field) CHECK(v >= -1e-10);
    CHECK(t.rigidity > 0.0);
    CHECK(t.rigidity <= t.supNorm * area(m.spec));
    const double err = std::abs(t.rigidity - T) / T;
    CHECK(err < prevErr);
    prevErr = err;
    if (h < 0.01) {
      CHECK(t.rigidity == doctest::Approx(T).epsilon(1e-4));
      CHECK(t.supNorm == doctest::Approx(vc).epsilon(1e-4));
    }
  }
}

TEST_CASE("linear_solve") {
  const CsrMatrix I = CsrMatrix::identity(5);
  const std::vector<double> b{1, 2, 3, 4, 5};
  CHECK(linear_solve(I, b) == b);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd R(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) R(i, j) = u(rng);
  const Eigen::MatrixXd A = R * R.transpose() + 10 * Eigen::MatrixXd::Identity(10, 10);
  Eigen::VectorXd rhs(10);
  for (int i = 0; i < 10; ++i) rhs[i] = u(rng);
  const Eigen::VectorXd x = A.llt().solve(rhs);
  std::vector<double> dense(100);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) dense[std::size_t(i * 10 + j)] = A(i, j);
  const auto y = linear_solve(CsrMatrix::from_dense(10, dense), std::vector<double>(rhs.data(), rhs.data() + 10), 1e-14);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(y[std::size_t(i)] - x[i]) < 1e-10);

  const Mesh m = triangulate(make_unit_square(), 1.0 / 32);
  const ReducedSystem sys = assemble_reduced(m);
  const auto v = linear_solve(sys.K, sys.load, 1e-12);
  const auto t = solve_torsion(sys, m);
  CHECK(dot(sys.load, v) == doctest::Approx(t.rigidity).epsilon(1e-10));

  const std::vector<double> neg{-1.0, 0.0, 0.0, -1.0};
  CHECK_THROWS_AS(linear_solve(CsrMatrix::from_dense(2, neg), std::vector<double>{1.0, 1.0}), SolverError);
}
