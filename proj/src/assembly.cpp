#include "speclab/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

using Local = std::array<std::array<double, 3>, 3>;

CsrMatrix pattern(const Mesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  std::vector<std::vector<int>> cols(n);
  for (const auto& t : mesh.tris)
    for (int a : t)
      for (int b : t) cols[static_cast<std::size_t>(a)].push_back(b);
  CsrMatrix m;
  m.n = n;
  m.rowPtr.assign(1, 0);
  for (auto& c : cols) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    m.colIdx.insert(m.colIdx.end(), c.begin(), c.end());
    m.rowPtr.push_back(m.colIdx.size());
  }
  m.values.assign(m.colIdx.size(), 0.0);
  return m;
}

void scatter(CsrMatrix& m, const std::array<int, 3>& t, const Local& local) {
  for (std::size_t a = 0; a < 3; ++a) {
    const auto row = static_cast<std::size_t>(t[a]);
    const auto first = m.colIdx.begin() + static_cast<std::ptrdiff_t>(m.rowPtr[row]);
    const auto last = m.colIdx.begin() + static_cast<std::ptrdiff_t>(m.rowPtr[row + 1]);
    for (std::size_t b = 0; b < 3; ++b) {
      const auto it = std::lower_bound(first, last, t[b]);
      m.values[static_cast<std::size_t>(it - m.colIdx.begin())] += local[a][b];
    }
  }
}

template <typename ElementMatrix>
CsrMatrix assemble(const Mesh& mesh, ElementMatrix&& element) {
  CsrMatrix m = pattern(mesh);
  const double tiny = 1e-14 * mesh.hMax * mesh.hMax;
  for (std::size_t e = 0; e < mesh.tris.size(); ++e) {
    const auto& t = mesh.tris[e];
    const std::array<Point, 3> p{mesh.nodes[static_cast<std::size_t>(t[0])], mesh.nodes[static_cast<std::size_t>(t[1])],
                                 mesh.nodes[static_cast<std::size_t>(t[2])]};
    const double area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
    if (!(area > tiny)) throw AssemblyError("degenerate or clockwise triangle " + std::to_string(e));
    scatter(m, t, element(p, area));
  }
  return m;
}

}  // namespace

std::vector<double> DofMap::expand(std::span<const double> dofValues) const {
  if (dofValues.size() != dofToNode.size()) throw Error("DofMap::expand: size mismatch");
  std::vector<double> nodal(nodeToDof.size(), 0.0);
  for (std::size_t d = 0; d < dofToNode.size(); ++d) nodal[static_cast<std::size_t>(dofToNode[d])] = dofValues[d];
  return nodal;
}

std::vector<double> DofMap::restrict_to_dofs(std::span<const double> nodal) const {
  if (nodal.size() != nodeToDof.size()) throw Error("DofMap::restrict_to_dofs: size mismatch");
  std::vector<double> v(dofToNode.size());
  for (std::size_t d = 0; d < dofToNode.size(); ++d) v[d] = nodal[static_cast<std::size_t>(dofToNode[d])];
  return v;
}

CsrMatrix assemble_stiffness(const Mesh& mesh) {
  return assemble(mesh, [](const std::array<Point, 3>& p, double area) {
    // Gradient of hat i is (b_i, c_i) / (2 area).
    std::array<double, 3> b{}, c{};
    for (std::size_t i = 0; i < 3; ++i) {
      const Point& pj = p[(i + 1) % 3];
      const Point& pk = p[(i + 2) % 3];
      b[i] = pj.y - pk.y;
      c[i] = pk.x - pj.x;
    }
    Local k{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
    return k;
  });
}

CsrMatrix assemble_mass(const Mesh& mesh) {
  return assemble(mesh, [](const std::array<Point, 3>&, double area) {
    Local m{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
  });
}

ReducedSystem apply_dirichlet(const CsrMatrix& K, const CsrMatrix& M, const Mesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  if (K.n != n || M.n != n) throw AssemblyError("apply_dirichlet: matrix size does not match mesh");
  ReducedSystem r;
  r.dofs.nodeToDof.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (mesh.flags[i] == NodeFlag::Free) {
      r.dofs.nodeToDof[i] = static_cast<int>(r.dofs.dofToNode.size());
      r.dofs.dofToNode.push_back(static_cast<int>(i));
    }
  if (r.dofs.dofToNode.empty()) throw AssemblyError("no free degrees of freedom: mesh too coarse for " + mesh.spec.label);

  auto reduce = [&](const CsrMatrix& A) {
    CsrMatrix out;
    out.n = r.dofs.num_dofs();
    out.rowPtr.assign(1, 0);
    for (int node : r.dofs.dofToNode) {
      const auto row = static_cast<std::size_t>(node);
      for (std::size_t k = A.rowPtr[row]; k < A.rowPtr[row + 1]; ++k) {
        const int d = r.dofs.nodeToDof[static_cast<std::size_t>(A.colIdx[k])];
        if (d < 0) continue;
        out.colIdx.push_back(d);
        out.values.push_back(A.values[k]);
      }
      out.rowPtr.push_back(out.colIdx.size());
    }
    return out;
  };
  r.K = reduce(K);
  r.M = reduce(M);

  const std::vector<double> ones(n, 1.0);
  const auto rowSums = M * ones;
  r.load = r.dofs.restrict_to_dofs(rowSums);
  return r;
}

ReducedSystem assemble_reduced(const Mesh& mesh) {
  return apply_dirichlet(assemble_stiffness(mesh), assemble_mass(mesh), mesh);
}

}  // namespace speclab
