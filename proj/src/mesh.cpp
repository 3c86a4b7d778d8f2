#include "speclab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

constexpr double kGradingCap = 4.0;

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Subdivide the intervals between forced coordinates into equal pieces of
// length <= h, then raise piece counts until neighbouring intervals differ by
// at most the grading cap.
std::vector<double> graded_lines(const std::vector<double>& forced, double h) {
  const std::size_t m = forced.size() - 1;
  std::vector<double> len(m);
  std::vector<long> count(m);
  for (std::size_t i = 0; i < m; ++i) {
    len[i] = forced[i + 1] - forced[i];
    count[i] = std::max(1L, static_cast<long>(std::ceil(len[i] / h - 1e-9)));
  }
  auto piece = [&](std::size_t i) { return len[i] / static_cast<double>(count[i]); };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j : {i - 1, i + 1}) {
        if (j >= m) continue;  // wraps for i == 0
        if (piece(i) > kGradingCap * piece(j)) {
          count[i] = static_cast<long>(std::ceil(len[i] / (kGradingCap * piece(j))));
          changed = true;
        }
      }
    }
  }
  std::vector<double> lines;
  for (std::size_t i = 0; i < m; ++i) {
    lines.push_back(forced[i]);
    for (long k = 1; k < count[i]; ++k)
      lines.push_back(forced[i] + (forced[i + 1] - forced[i]) * static_cast<double>(k) / static_cast<double>(count[i]));
  }
  lines.push_back(forced.back());
  return lines;
}

double triangle_signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

void finalize(Mesh& mesh) {
  mesh.elementArea.resize(mesh.tris.size());
  mesh.hMax = 0.0;
  for (std::size_t e = 0; e < mesh.tris.size(); ++e) {
    const auto& t = mesh.tris[e];
    const Point a = mesh.nodes[static_cast<std::size_t>(t[0])];
    const Point b = mesh.nodes[static_cast<std::size_t>(t[1])];
    const Point c = mesh.nodes[static_cast<std::size_t>(t[2])];
    mesh.elementArea[e] = triangle_signed_area(a, b, c);
    mesh.hMax = std::max({mesh.hMax, std::hypot(b.x - a.x, b.y - a.y), std::hypot(c.x - b.x, c.y - b.y),
                          std::hypot(a.x - c.x, a.y - c.y)});
  }
}

void classify_node(const DomainGeometry& geo, Point p, bool dirichlet, NodeKind& kind, NodeFlag& flag) {
  if (geo.on_outer_boundary(p))
    kind = NodeKind::Boundary;
  else if (geo.on_slit(p))
    kind = NodeKind::Slit;
  else
    kind = NodeKind::Interior;
  flag = (dirichlet && kind != NodeKind::Interior) ? NodeFlag::Constrained : NodeFlag::Free;
}

}  // namespace

std::size_t Mesh::num_free() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), NodeFlag::Free));
}

Point Mesh::centroid(std::size_t e) const {
  const auto& t = tris[e];
  const Point a = nodes[static_cast<std::size_t>(t[0])];
  const Point b = nodes[static_cast<std::size_t>(t[1])];
  const Point c = nodes[static_cast<std::size_t>(t[2])];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : elementArea) s += a;
  return s;
}

Mesh triangulate(const DomainSpec& spec, double hTarget) {
  validate(spec);
  if (!(hTarget > 0.0) || !std::isfinite(hTarget)) throw ResolutionError("hTarget must be positive");
  const double feature = feature_size(spec);
  if (hTarget > feature / 4.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "hTarget=" << hTarget << " is too coarse for " << spec.label << ": at least 4 cells across the smallest feature ("
       << feature << ") require hTarget <= " << feature / 4.0;
    throw ResolutionError(os.str());
  }

  std::vector<double> fx, fy;
  for (const auto& r : spec.rects) {
    fx.insert(fx.end(), {r.x0, r.x1});
    fy.insert(fy.end(), {r.y0, r.y1});
  }
  for (const auto& s : spec.slits) {
    fx.insert(fx.end(), {s.a.x, s.b.x});
    fy.insert(fy.end(), {s.a.y, s.b.y});
  }
  const auto xs = graded_lines(sorted_unique(fx), hTarget);
  const auto ys = graded_lines(sorted_unique(fy), hTarget);
  const std::size_t nx = xs.size(), ny = ys.size();

  DomainGeometry geo(spec);
  std::vector<char> cellIn((nx - 1) * (ny - 1), 0);
  std::vector<int> nodeId(nx * ny, -1);
  for (std::size_t i = 0; i + 1 < nx; ++i)
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const Point c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (geo.contains(c)) {
        cellIn[i * (ny - 1) + j] = 1;
        for (std::size_t a : {i, i + 1})
          for (std::size_t b : {j, j + 1}) nodeId[a * ny + b] = 0;
      }
    }

  Mesh mesh;
  mesh.spec = spec;
  const bool dirichlet = spec.bc == BoundaryCondition::Dirichlet;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      if (nodeId[i * ny + j] < 0) continue;
      nodeId[i * ny + j] = static_cast<int>(mesh.nodes.size());
      const Point p{xs[i], ys[j]};
      mesh.nodes.push_back(p);
      NodeKind kind{};
      NodeFlag flag{};
      classify_node(geo, p, dirichlet, kind, flag);
      mesh.kinds.push_back(kind);
      mesh.flags.push_back(flag);
    }

  const double midX = 0.5 * (xs.front() + xs.back()), midY = 0.5 * (ys.front() + ys.back());
  for (std::size_t i = 0; i + 1 < nx; ++i)
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      if (!cellIn[i * (ny - 1) + j]) continue;
      const int p00 = nodeId[i * ny + j], p10 = nodeId[(i + 1) * ny + j];
      const int p11 = nodeId[(i + 1) * ny + j + 1], p01 = nodeId[i * ny + j + 1];
      const double cx = 0.5 * (xs[i] + xs[i + 1]) - midX, cy = 0.5 * (ys[j] + ys[j + 1]) - midY;
      // Diagonal orientation mirrors across both midlines of the bounding box.
      if (cx * cy >= 0.0) {
        mesh.tris.push_back({p00, p10, p11});
        mesh.tris.push_back({p00, p11, p01});
      } else {
        mesh.tris.push_back({p00, p10, p01});
        mesh.tris.push_back({p10, p11, p01});
      }
    }
  finalize(mesh);
  check_free_connectivity(mesh);
  return mesh;
}

Mesh refine(const Mesh& mesh) {
  DomainGeometry geo(mesh.spec);
  const bool dirichlet = mesh.spec.bc == BoundaryCondition::Dirichlet;
  Mesh out;
  out.spec = mesh.spec;
  out.nodes = mesh.nodes;
  out.flags = mesh.flags;
  out.kinds = mesh.kinds;
  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.tris.size() * 2);
  const auto n = static_cast<std::uint64_t>(mesh.nodes.size());
  auto mid = [&](int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b)), hi = static_cast<std::uint64_t>(std::max(a, b));
    const std::uint64_t key = lo * n + hi;
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Point pa = mesh.nodes[lo], pb = mesh.nodes[hi];
    const Point p{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
    NodeKind kind{};
    NodeFlag flag{};
    classify_node(geo, p, dirichlet, kind, flag);
    // A new node can only sit on the boundary or a slit if both parents do.
    const bool parentsOnBoundary = mesh.kinds[lo] != NodeKind::Interior && mesh.kinds[hi] != NodeKind::Interior;
    if (!parentsOnBoundary) {
      kind = NodeKind::Interior;
      flag = NodeFlag::Free;
    }
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(p);
    out.kinds.push_back(kind);
    out.flags.push_back(flag);
    midpoint.emplace(key, id);
    return id;
  };
  out.tris.reserve(mesh.tris.size() * 4);
  for (const auto& t : mesh.tris) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.tris.push_back({a, ab, ca});
    out.tris.push_back({ab, b, bc});
    out.tris.push_back({ca, bc, c});
    out.tris.push_back({ab, bc, ca});
  }
  finalize(out);
  return out;
}

void check_free_connectivity(const Mesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& t : mesh.tris)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      if (mesh.flags[static_cast<std::size_t>(a)] == NodeFlag::Free &&
          mesh.flags[static_cast<std::size_t>(b)] == NodeFlag::Free) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
      }
    }
  std::vector<char> seen(n, 0);
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (mesh.flags[i] == NodeFlag::Free) {
      start = i;
      break;
    }
  if (start == n) return;  // no free nodes; reported by the Dirichlet reduction
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        q.push(static_cast<std::size_t>(w));
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (mesh.flags[i] == NodeFlag::Free && !seen[i])
      throw GeometryError("free nodes are disconnected: slits split " + mesh.spec.label);
}

void write_vtk(const Mesh& mesh, std::ostream& os,
               const std::vector<std::pair<std::string, std::vector<double>>>& pointFields) {
  os << "# vtk DataFile Version 3.0\n" << mesh.spec.label << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os.precision(17);
  os << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& p : mesh.nodes) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.tris.size() << ' ' << 4 * mesh.tris.size() << '\n';
  for (const auto& t : mesh.tris) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.tris.size() << '\n';
  for (std::size_t e = 0; e < mesh.tris.size(); ++e) os << "5\n";
  os << "POINT_DATA " << mesh.nodes.size() << "\nSCALARS flags int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    os << (mesh.flags[i] == NodeFlag::Constrained ? 1 : 0) + 2 * static_cast<int>(mesh.kinds[i]) << '\n';
  for (const auto& [name, values] : pointFields) {
    if (values.size() != mesh.nodes.size()) throw Error("vtk field '" + name + "' has wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << v << '\n';
  }
}

std::vector<double> grid_lines_x(const Mesh& mesh) {
  std::vector<double> v;
  v.reserve(mesh.nodes.size());
  for (const auto& p : mesh.nodes) v.push_back(p.x);
  return sorted_unique(std::move(v));
}

std::vector<double> grid_lines_y(const Mesh& mesh) {
  std::vector<double> v;
  v.reserve(mesh.nodes.size());
  for (const auto& p : mesh.nodes) v.push_back(p.y);
  return sorted_unique(std::move(v));
}

}  // namespace speclab
