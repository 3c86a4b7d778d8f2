#include "speclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Index range of compressed cells adjacent to coordinate c: a single cell if
// c is strictly inside one, both neighbours if c lies on a grid line.
// Returns an empty range when c is outside [grid.front(), grid.back()].
std::pair<std::ptrdiff_t, std::ptrdiff_t> adjacent_cells(const std::vector<double>& grid, double c) {
  const auto ncell = static_cast<std::ptrdiff_t>(grid.size()) - 1;
  if (c < grid.front() || c > grid.back()) return {0, -1};
  auto it = std::lower_bound(grid.begin(), grid.end(), c);
  const auto k = static_cast<std::ptrdiff_t>(it - grid.begin());
  if (it != grid.end() && *it == c) return {std::max<std::ptrdiff_t>(k - 1, 0), std::min(k, ncell - 1)};
  return {k - 1, k - 1};
}

bool rects_touch(const Rect& a, const Rect& b) {
  const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (ox < 0.0 || oy < 0.0) return false;
  return ox > 0.0 || oy > 0.0;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double Slit::length() const { return std::hypot(b.x - a.x, b.y - a.y); }

double point_segment_distance(Point p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
  // Axis-parallel segments: keep the exact perpendicular offset.
  if (dy == 0.0 && t > 0.0 && t < 1.0) return std::abs(p.y - s.a.y);
  if (dx == 0.0 && t > 0.0 && t < 1.0) return std::abs(p.x - s.a.x);
  return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

void validate(const DomainSpec& spec) {
  if (spec.rects.empty()) throw GeometryError("domain has no rectangles");
  for (const auto& r : spec.rects) {
    if (!finite(r.x0) || !finite(r.x1) || !finite(r.y0) || !finite(r.y1))
      throw GeometryError("rectangle with non-finite coordinates");
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1)) throw GeometryError("rectangle with non-positive area");
  }
  const std::size_t n = spec.rects.size();
  std::vector<std::size_t> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](std::size_t i) {
    while (comp[i] != i) i = comp[i] = comp[comp[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rects_touch(spec.rects[i], spec.rects[j])) comp[find(i)] = find(j);
  for (std::size_t i = 1; i < n; ++i)
    if (find(i) != find(0)) throw GeometryError("rectangle union is not connected");

  if (spec.slits.empty()) return;
  if (spec.bc == BoundaryCondition::Neumann) throw GeometryError("slits are only supported with Dirichlet conditions");
  DomainGeometry geo(DomainSpec{spec.rects, {}, spec.bc, spec.label, spec.featureSize});
  for (const auto& s : spec.slits) {
    if (s.a == s.b) throw GeometryError("degenerate slit");
    if (s.a.x != s.b.x && s.a.y != s.b.y) throw GeometryError("slit is not axis-parallel");
    // Closure test at endpoints and at midpoints between rectangle edges
    // crossed by the slit.
    std::vector<double> ts{0.0, 1.0};
    for (const auto& r : spec.rects) {
      for (double c : s.vertical() ? std::vector<double>{r.y0, r.y1} : std::vector<double>{r.x0, r.x1}) {
        const double a = s.vertical() ? s.a.y : s.a.x;
        const double b = s.vertical() ? s.b.y : s.b.x;
        const double t = (c - a) / (b - a);
        if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
    }
    ts = sorted_unique(ts);
    std::vector<double> probes = ts;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) probes.push_back(0.5 * (ts[k] + ts[k + 1]));
    for (double t : probes) {
      const Point p{s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)};
      if (!geo.contains(p)) throw GeometryError("slit leaves the closure of the domain");
    }
  }
}

double area(const DomainSpec& spec) { return DomainGeometry(spec).area(); }

double feature_size(const DomainSpec& spec) {
  if (spec.featureSize) return *spec.featureSize;
  double f = std::numeric_limits<double>::infinity();
  // A lone rectangle has no narrow part; apply_dirichlet still rejects meshes
  // without free nodes.
  if (spec.rects.size() > 1)
    for (const auto& r : spec.rects) f = std::min({f, r.width(), r.height()});
  for (const auto& s : spec.slits) {
    const double c = s.vertical() ? s.a.x : s.a.y;
    std::vector<double> lines;
    for (const auto& r : spec.rects) {
      if (s.vertical()) {
        lines.push_back(r.x0);
        lines.push_back(r.x1);
      } else {
        lines.push_back(r.y0);
        lines.push_back(r.y1);
      }
    }
    for (const auto& o : spec.slits)
      if (o.vertical() == s.vertical()) lines.push_back(s.vertical() ? o.a.x : o.a.y);
    for (double l : lines)
      if (l != c) f = std::min(f, std::abs(l - c));
  }
  return f;
}

DomainGeometry::DomainGeometry(DomainSpec spec) : spec_(std::move(spec)) {
  if (spec_.rects.empty()) throw GeometryError("domain has no rectangles");
  std::vector<double> xs, ys;
  for (const auto& r : spec_.rects) {
    xs.push_back(r.x0);
    xs.push_back(r.x1);
    ys.push_back(r.y0);
    ys.push_back(r.y1);
  }
  xs_ = sorted_unique(std::move(xs));
  ys_ = sorted_unique(std::move(ys));
  const std::size_t nx = xs_.size() - 1, ny = ys_.size() - 1;
  inside_.assign(nx * ny, 0);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const Point c{0.5 * (xs_[i] + xs_[i + 1]), 0.5 * (ys_[j] + ys_[j + 1])};
      const bool in = std::any_of(spec_.rects.begin(), spec_.rects.end(),
                                  [&](const Rect& r) { return r.contains_open(c); });
      inside_[i * ny + j] = in ? 1 : 0;
      if (in) area_ += (xs_[i + 1] - xs_[i]) * (ys_[j + 1] - ys_[j]);
    }
  }

  // Vertical boundary pieces on x = xs_[i], merged along y.
  for (std::size_t i = 0; i <= nx; ++i) {
    std::ptrdiff_t start = -1;
    for (std::size_t j = 0; j <= ny; ++j) {
      const bool edge = j < ny && (cell_inside(static_cast<std::ptrdiff_t>(i) - 1, static_cast<std::ptrdiff_t>(j)) !=
                                   cell_inside(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)));
      if (edge && start < 0) start = static_cast<std::ptrdiff_t>(j);
      if (!edge && start >= 0) {
        boundary_.push_back({{xs_[i], ys_[static_cast<std::size_t>(start)]}, {xs_[i], ys_[j]}});
        start = -1;
      }
    }
  }
  for (std::size_t j = 0; j <= ny; ++j) {
    std::ptrdiff_t start = -1;
    for (std::size_t i = 0; i <= nx; ++i) {
      const bool edge = i < nx && (cell_inside(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j) - 1) !=
                                   cell_inside(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)));
      if (edge && start < 0) start = static_cast<std::ptrdiff_t>(i);
      if (!edge && start >= 0) {
        boundary_.push_back({{xs_[static_cast<std::size_t>(start)], ys_[j]}, {xs_[i], ys_[j]}});
        start = -1;
      }
    }
  }
  for (const auto& s : spec_.slits) slits_.push_back({s.a, s.b});
}

bool DomainGeometry::cell_inside(std::ptrdiff_t i, std::ptrdiff_t j) const {
  const auto nx = static_cast<std::ptrdiff_t>(xs_.size()) - 1;
  const auto ny = static_cast<std::ptrdiff_t>(ys_.size()) - 1;
  if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
  return inside_[static_cast<std::size_t>(i * ny + j)] != 0;
}

bool DomainGeometry::contains(Point p) const {
  const auto [i0, i1] = adjacent_cells(xs_, p.x);
  const auto [j0, j1] = adjacent_cells(ys_, p.y);
  for (auto i = i0; i <= i1; ++i)
    for (auto j = j0; j <= j1; ++j)
      if (cell_inside(i, j)) return true;
  return false;
}

bool DomainGeometry::on_outer_boundary(Point p) const {
  const auto [i0, i1] = adjacent_cells(xs_, p.x);
  const auto [j0, j1] = adjacent_cells(ys_, p.y);
  if (i1 < i0 || j1 < j0) return false;
  bool any = false, all = true;
  // A point on the outermost grid line also touches the exterior.
  if (p.x == xs_.front() || p.x == xs_.back() || p.y == ys_.front() || p.y == ys_.back()) all = false;
  for (auto i = i0; i <= i1; ++i)
    for (auto j = j0; j <= j1; ++j) {
      const bool in = cell_inside(i, j);
      any = any || in;
      all = all && in;
    }
  return any && !all;
}

bool DomainGeometry::on_slit(Point p) const {
  for (const auto& s : spec_.slits) {
    if (s.vertical()) {
      if (p.x == s.a.x && p.y >= std::min(s.a.y, s.b.y) && p.y <= std::max(s.a.y, s.b.y)) return true;
    } else if (p.y == s.a.y && p.x >= std::min(s.a.x, s.b.x) && p.x <= std::max(s.a.x, s.b.x)) {
      return true;
    }
  }
  return false;
}

bool DomainGeometry::contains_interior(Point p) const {
  return contains(p) && !on_outer_boundary(p) && !on_slit(p);
}

double DomainGeometry::distance_unchecked(Point p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : boundary_) d = std::min(d, point_segment_distance(p, s));
  for (const auto& s : slits_) d = std::min(d, point_segment_distance(p, s));
  return d;
}

double DomainGeometry::distance_to_boundary(Point p) const {
  if (!contains(p)) {
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") is outside the domain";
    throw GeometryError(os.str());
  }
  return distance_unchecked(p);
}

double distance_to_boundary(const DomainSpec& spec, Point p) { return DomainGeometry(spec).distance_to_boundary(p); }

double Profile::operator()(double x) const {
  if (xs.empty()) throw GeometryError("empty profile");
  if (x <= xs.front()) return fs.front();
  if (x >= xs.back()) return fs.back();
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(it - xs.begin());
  if (*it == x) return fs[k];
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return fs[k - 1] + w * (fs[k] - fs[k - 1]);
}

Profile Profile::sample(const std::function<double(double)>& g, double cMinus, double cPlus, int pointsPerUnit) {
  if (!(cMinus <= 0.0 && cPlus > 0.0)) throw GeometryError("profile interval must satisfy c- <= 0 < c+");
  const int perUnit = std::max(pointsPerUnit - 1, 1);
  Profile p;
  const int mMinus = static_cast<int>(std::ceil(-cMinus * perUnit));
  const int mPlus = static_cast<int>(std::ceil(cPlus * perUnit));
  for (int k = mMinus; k >= 1; --k) {
    const double x = cMinus * k / mMinus;
    p.xs.push_back(x);
    p.fs.push_back(g(x));
  }
  for (int k = 0; k <= mPlus; ++k) {
    const double x = cPlus * k / mPlus;
    p.xs.push_back(x);
    p.fs.push_back(g(x));
  }
  return p;
}

void validate_profile(const Profile& f) {
  if (f.xs.size() < 2 || f.xs.size() != f.fs.size()) throw GeometryError("profile needs matching xs/fs with >= 2 samples");
  for (std::size_t k = 1; k < f.xs.size(); ++k)
    if (!(f.xs[k] > f.xs[k - 1])) throw GeometryError("profile abscissae must be strictly increasing");
  if (!(f.cMinus() <= 0.0 && f.cPlus() > 0.0)) throw GeometryError("profile interval must satisfy c- <= 0 < c+");
  const auto zero = std::find(f.xs.begin(), f.xs.end(), 0.0);
  if (zero == f.xs.end()) throw GeometryError("profile must be tabulated at 0");
  const auto k0 = static_cast<std::size_t>(zero - f.xs.begin());
  if (f.fs[k0] != 1.0) throw GeometryError("profile must satisfy f(0) = 1");
  for (std::size_t k = 0; k < f.fs.size(); ++k) {
    if (!(f.fs[k] >= 0.0 && f.fs[k] <= 1.0)) throw GeometryError("profile values must lie in [0,1]");
    if (k != k0 && !(f.fs[k] < 1.0)) throw GeometryError("profile must satisfy f(x) < 1 for x != 0");
  }
  for (std::size_t k = k0 + 1; k < f.fs.size(); ++k)
    if (f.fs[k] > f.fs[k - 1]) throw GeometryError("profile must be non-increasing on [0, c+]");
  for (std::size_t k = 1; k <= k0; ++k)
    if (f.fs[k] < f.fs[k - 1]) throw GeometryError("profile must be non-decreasing on [c-, 0]");
}

Profile profile_triangle() {
  return Profile::sample([](double x) { return 1.0 - std::abs(x); }, -1.0, 1.0);
}

Profile profile_alpha(double alpha) {
  if (!(alpha >= 1.0)) throw GeometryError("alpha-profile requires alpha >= 1");
  return Profile::sample(
      [alpha](double x) {
        const double s = std::pow(2.0 * std::abs(x), alpha);
        return s >= 1.0 ? 0.0 : std::pow(1.0 - s, 1.0 / alpha);
      },
      -0.5, 0.5);
}

DomainSpec make_dumbbell_dirichlet(double eps, double theta, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw GeometryError("dumbbell requires 0 < eps < 1");
  if (!(theta > 0.0)) throw GeometryError("dumbbell requires theta > 0");
  if (!(theta < delta)) throw GeometryError("dumbbell tube is wider than the square (theta >= delta)");
  if (!(2.0 - delta > eps)) throw GeometryError("dumbbell square overlaps the rectangle (2 - delta <= eps)");
  DomainSpec s;
  s.rects = {{-eps, eps, -1.0 / eps, 1.0 / eps}, {0.0, 2.0, -theta, theta}, {2.0 - delta, 2.0 + delta, -delta, delta}};
  s.bc = BoundaryCondition::Dirichlet;
  std::ostringstream os;
  os << "dumbbell(eps=" << eps << ",theta=" << theta << ",delta=" << delta << ")";
  s.label = os.str();
  validate(s);
  return s;
}

double critical_delta(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw GeometryError("critical_delta requires 0 < eps < 1");
  return std::sqrt(2.0) * eps / std::sqrt(1.0 + eps * eps * eps * eps);
}

DomainSpec make_comb(int n, double alpha, double d) {
  if (n < 2) throw GeometryError("comb requires n >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw GeometryError("comb requires 0 < alpha < 1");
  if (!(d > 0.0)) throw GeometryError("comb requires d > 0");
  const double gap = d * std::pow(static_cast<double>(n), -alpha);
  if (!(gap < 1.0)) throw GeometryError("comb slits reach the top (d n^-alpha >= 1)");
  DomainSpec s;
  s.rects = {{0.0, 1.0, 0.0, 1.0}};
  for (int i = 1; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    s.slits.push_back({{x, 0.0}, {x, 1.0 - gap}});
  }
  s.bc = BoundaryCondition::Dirichlet;
  std::ostringstream os;
  os << "comb(n=" << n << ",alpha=" << alpha << ",d=" << d << ")";
  s.label = os.str();
  validate(s);
  return s;
}

DomainSpec make_horn(const HornSpec& h) {
  validate_profile(h.profile);
  if (h.n < 1) throw GeometryError("horn requires n >= 1");
  if (h.strips < 4 * h.n) throw GeometryError("horn staircase under-resolved (strips < 4n)");
  const double cm = h.profile.cMinus(), cp = h.profile.cPlus();
  const double n = h.n;
  int sm = cm < 0.0 ? static_cast<int>(std::lround(h.strips * (-cm) / (cp - cm))) : 0;
  if (cm < 0.0) sm = std::clamp(sm, 1, h.strips - 1);
  const int sp = h.strips - sm;

  DomainSpec s;
  double feature = std::numeric_limits<double>::infinity();
  auto add_strip = [&](double a, double b, double fInner) {
    const double hw = 0.5 * fInner;
    if (hw <= 0.0) return;
    s.rects.push_back({a, b, -hw, hw});
    if (fInner >= 0.5) feature = std::min({feature, b - a, 2.0 * hw});
  };
  for (int k = sm - 1; k >= 0; --k)
    add_strip(n * cm * (k + 1) / sm, n * cm * k / sm, h.profile(cm * k / sm));
  for (int k = 0; k < sp; ++k)
    add_strip(n * cp * k / sp, n * cp * (k + 1) / sp, h.profile(cp * k / sp));
  s.bc = BoundaryCondition::Dirichlet;
  s.featureSize = feature;
  std::ostringstream os;
  os << "horn(n=" << h.n << ",strips=" << h.strips << ")";
  s.label = os.str();
  validate(s);
  return s;
}

DomainSpec make_neumann_dumbbell(double delta, double theta) {
  if (!(std::abs(delta) < 0.5)) throw GeometryError("neumann dumbbell requires |delta| < 0.5");
  if (!(theta > 0.0 && theta < 0.25)) throw GeometryError("neumann dumbbell requires 0 < theta < 0.25");
  DomainSpec s;
  s.rects = {{-1.0, 0.0, -1.0, 1.0}, {0.0, 1.0 + delta, -theta, theta}};
  s.bc = BoundaryCondition::Neumann;
  std::ostringstream os;
  os << "neumann-dumbbell(delta=" << delta << ",theta=" << theta << ")";
  s.label = os.str();
  validate(s);
  return s;
}

DomainSpec make_rectangle(double x0, double x1, double y0, double y1, BoundaryCondition bc, std::string label) {
  DomainSpec s;
  s.rects = {{x0, x1, y0, y1}};
  s.bc = bc;
  s.label = std::move(label);
  validate(s);
  return s;
}

DomainSpec make_unit_square(BoundaryCondition bc) { return make_rectangle(0.0, 1.0, 0.0, 1.0, bc, "unit-square"); }

DomainSpec make_r_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw GeometryError("R_eps requires 0 < eps < 1");
  return make_rectangle(-eps, eps, -1.0 / eps, 1.0 / eps, BoundaryCondition::Dirichlet, "r-eps");
}

}  // namespace speclab
