#include "speclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <tuple>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_field(std::span<const double> field, const Mesh& mesh) {
  if (field.size() != mesh.num_nodes()) throw Error("field size does not match the mesh");
}

void check_cells(std::span<const double> values, const Mesh& mesh) {
  if (values.size() != mesh.num_elements()) throw Error("element field size does not match the mesh");
}

ConcentrationProfile profile_from_masses(std::vector<double> masses, const Mesh& mesh, double p) {
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("concentration profile of a zero field");
  const std::size_t n = masses.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return masses[a] / mesh.elementArea[a] > masses[b] / mesh.elementArea[b];
  });
  const double area = mesh.total_area();
  ConcentrationProfile cp;
  cp.p = p;
  cp.totalMass = total;
  cp.t.reserve(n + 1);
  cp.mass.reserve(n + 1);
  cp.t.push_back(0.0);
  cp.mass.push_back(0.0);
  double a = 0.0, m = 0.0;
  for (std::size_t e : order) {
    a += mesh.elementArea[e];
    m += masses[e];
    cp.t.push_back(a / area);
    cp.mass.push_back(m / total);
  }
  cp.t.back() = 1.0;
  cp.mass.back() = 1.0;
  return cp;
}

double l2_norm_squared(std::span<const double> field, const Mesh& mesh) {
  const auto m = element_masses(field, mesh, 2.0);
  return std::accumulate(m.begin(), m.end(), 0.0);
}

void require_normalised(std::span<const double> field, const Mesh& mesh) {
  const double n2 = l2_norm_squared(field, mesh);
  if (std::abs(n2 - 1.0) > 1e-6) throw DomainError("field is not L2-normalised (||u||^2 = " + std::to_string(n2) + ")");
}

bool horn_check(const DomainSpec& s) {
  if (!s.slits.empty() || s.rects.empty()) return false;
  std::vector<Rect> r = s.rects;
  std::sort(r.begin(), r.end(), [](const Rect& a, const Rect& b) { return a.x0 < b.x0; });
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(r[i].y0 + r[i].y1) > 1e-12) return false;
    if (i > 0 && std::abs(r[i].x0 - r[i - 1].x1) > 1e-12) return false;
  }
  // Strip widths are non-decreasing up to x = 0 and non-increasing after.
  for (std::size_t i = 1; i < r.size(); ++i) {
    const bool right = r[i].x0 >= -1e-12;
    const bool leftOfZero = r[i].x1 <= 1e-12;
    if (leftOfZero && r[i].height() < r[i - 1].height() - 1e-12) return false;
    if (right && r[i - 1].x0 >= -1e-12 && r[i].height() > r[i - 1].height() + 1e-12) return false;
  }
  return true;
}

}  // namespace

std::vector<double> element_masses(std::span<const double> field, const Mesh& mesh, double p) {
  check_field(field, mesh);
  if (!(p > 0.0)) throw DomainError("exponent p must be positive");
  std::vector<double> m(mesh.num_elements());
  for (std::size_t e = 0; e < m.size(); ++e) {
    const auto& t = mesh.tris[e];
    const double a = field[static_cast<std::size_t>(t[0])], b = field[static_cast<std::size_t>(t[1])],
                 c = field[static_cast<std::size_t>(t[2])];
    if (p == 2.0) {
      const double s = a + b + c;
      m[e] = mesh.elementArea[e] / 12.0 * (a * a + b * b + c * c + s * s);
    } else {
      m[e] = mesh.elementArea[e] / 3.0 * (std::pow(std::abs(a), p) + std::pow(std::abs(b), p) + std::pow(std::abs(c), p));
    }
  }
  return m;
}

double integrate(std::span<const double> field, const Mesh& mesh) {
  check_field(field, mesh);
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.tris[e];
    s += mesh.elementArea[e] / 3.0 *
         (field[static_cast<std::size_t>(t[0])] + field[static_cast<std::size_t>(t[1])] + field[static_cast<std::size_t>(t[2])]);
  }
  return s;
}

double ConcentrationProfile::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const auto i = static_cast<std::size_t>(it - t.begin());
  const double t0 = t[i - 1], t1 = t[i];
  if (t1 <= t0) return mass[i];
  return mass[i - 1] + (mass[i] - mass[i - 1]) * (s - t0) / (t1 - t0);
}

ConcentrationProfile concentration_profile(std::span<const double> field, const Mesh& mesh, double p) {
  return profile_from_masses(element_masses(field, mesh, p), mesh, p);
}

ConcentrationProfile concentration_profile_cellwise(std::span<const double> elementValues, const Mesh& mesh, double p) {
  check_cells(elementValues, mesh);
  std::vector<double> m(mesh.num_elements());
  for (std::size_t e = 0; e < m.size(); ++e) m[e] = mesh.elementArea[e] * std::pow(std::abs(elementValues[e]), p);
  return profile_from_masses(std::move(m), mesh, p);
}

double participation_ratio(std::span<const double> field, const Mesh& mesh, double domainArea) {
  const auto m1 = element_masses(field, mesh, 1.0);
  const double l1 = std::accumulate(m1.begin(), m1.end(), 0.0);
  const double l2 = l2_norm_squared(field, mesh);
  if (!(l2 > 0.0)) throw DomainError("participation ratio of a zero field");
  return l1 * l1 / (domainArea * l2);
}

double participation_ratio_cellwise(std::span<const double> elementValues, const Mesh& mesh, double domainArea) {
  check_cells(elementValues, mesh);
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    l1 += mesh.elementArea[e] * std::abs(elementValues[e]);
    l2 += mesh.elementArea[e] * elementValues[e] * elementValues[e];
  }
  if (!(l2 > 0.0)) throw DomainError("participation ratio of a zero field");
  return l1 * l1 / (domainArea * l2);
}

double mass_on_region(std::span<const double> field, const Mesh& mesh, const Region& region) {
  const auto m = element_masses(field, mesh, 2.0);
  double in = 0.0, total = 0.0;
  for (std::size_t e = 0; e < m.size(); ++e) {
    total += m[e];
    if (region(mesh.centroid(e))) in += m[e];
  }
  if (!(total > 0.0)) throw DomainError("mass of a zero field");
  return in / total;
}

double region_measure(const Mesh& mesh, const Region& region) {
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    if (region(mesh.centroid(e))) s += mesh.elementArea[e];
  return s;
}

BoundReport make_report(std::string name, double lhs, double rhs, double relTol) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = relTol * std::max(std::abs(lhs), std::abs(rhs));
  r.satisfied = r.slack >= -r.tolerance;
  return r;
}

BoundReport check_supnorm_bound(double lambda1, std::span<const double> field, const Mesh& mesh, double relTol) {
  if (!(lambda1 > 0.0)) throw DomainError("sup-norm bound needs lambda1 > 0");
  check_field(field, mesh);
  require_normalised(field, mesh);
  double sup = 0.0;
  for (double v : field) sup = std::max(sup, std::abs(v));
  return make_report("supnorm", sup, std::sqrt(std::numbers::e / (4.0 * kPi) * lambda1), relTol);
}

BoundReport check_faber_krahn(double lambda1, double area, double relTol) {
  if (!(lambda1 > 0.0) || !(area > 0.0)) throw DomainError("Faber-Krahn check needs lambda1 > 0 and area > 0");
  return make_report("faber_krahn", kPi * kBesselJ01 * kBesselJ01, lambda1 * area, relTol);
}

BoundReport check_torsion_sup(double lambda1, const TorsionResult& torsion, double relTol) {
  if (!(lambda1 > 0.0)) throw DomainError("torsion sup bound needs lambda1 > 0");
  return make_report("torsion_sup", torsion.supNorm, (4.0 + 6.0 * std::log(2.0)) / lambda1, relTol);
}

BoundReport check_kohler_jobin(double rigidity, double lambda1, double relTol) {
  if (!(rigidity > 0.0)) throw DomainError("Kohler-Jobin check needs T > 0");
  if (!(lambda1 > 0.0)) throw DomainError("Kohler-Jobin check needs lambda1 > 0");
  const double j2 = kBesselJ01 * kBesselJ01;
  return make_report("kohler_jobin", kPi / 8.0 * j2 * j2, rigidity * lambda1 * lambda1, relTol);
}

DistanceField distance_field(const Mesh& mesh) {
  const DomainGeometry g(mesh.spec);
  DistanceField d;
  d.nodal.resize(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
    d.nodal[i] = mesh.kinds[i] == NodeKind::Interior ? g.distance_to_boundary(mesh.nodes[i]) : 0.0;
  d.centroid.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) d.centroid[e] = g.distance_to_boundary(mesh.centroid(e));
  return d;
}

double max_distance(const DistanceField& d) {
  return d.nodal.empty() ? 0.0 : *std::max_element(d.nodal.begin(), d.nodal.end());
}

HardyReport hardy_quantities(std::span<const double> field, double lambdaK, const DistanceField& d, const Mesh& mesh,
                             double relTol) {
  check_field(field, mesh);
  require_normalised(field, mesh);
  if (d.centroid.size() != mesh.num_elements()) throw Error("distance field does not match the mesh");
  const auto masses = element_masses(field, mesh, 2.0);
  HardyReport h;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.tris[e];
    const bool touches = std::any_of(t.begin(), t.end(), [&](int v) { return mesh.kinds[static_cast<std::size_t>(v)] != NodeKind::Interior; });
    if (touches) {
      h.excludedMass += masses[e];
      ++h.excludedElements;
      continue;
    }
    const double dc = d.centroid[e];
    if (!(dc > 0.0)) throw DomainError("zero distance at an interior centroid");
    const double uc = (field[static_cast<std::size_t>(t[0])] + field[static_cast<std::size_t>(t[1])] +
                       field[static_cast<std::size_t>(t[2])]) / 3.0;
    h.integral += mesh.elementArea[e] * uc * uc / (dc * dc);
  }
  h.bound = make_report("hardy", h.integral, 16.0 * lambdaK, relTol);
  return h;
}

Theorem41Quantities theorem41_hypotheses(const DomainSpec& spec, const Mesh& mesh, double eta) {
  return theorem41_hypotheses(spec, mesh, distance_field(mesh), eta);
}

Theorem41Quantities theorem41_hypotheses(const DomainSpec& spec, const Mesh& mesh, const DistanceField& d, double eta) {
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  Theorem41Quantities q;
  q.eta = eta;
  double in = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    if (d.centroid[e] < eta) in += mesh.elementArea[e];
  q.fraction = in / area(spec);
  q.maxDistance = max_distance(d);
  q.ratio = q.maxDistance > 0.0 ? std::min(eta / q.maxDistance, 1.0) : 1.0;
  return q;
}

HeatContentReport heat_content_2d(const EigenResult& eig, const Mesh& mesh, double t, double relTol) {
  if (!(t > 0.0)) throw DomainError("heat content needs t > 0");
  if (eig.size() == 0) throw DomainError("heat content needs at least one eigenpair");
  const double omega = area(mesh.spec);
  HeatContentReport h;
  h.t = t;
  h.terms = static_cast<int>(eig.size());
  double parseval = 0.0;
  for (std::size_t j = 0; j < eig.size(); ++j) {
    const double c = integrate(eig.vectors[j], mesh);
    parseval += c * c;
    h.value += std::exp(-eig.eigenvalues[j] * t) * c * c;
  }
  h.truncationBound = std::exp(-eig.eigenvalues.back() * t) * std::max(0.0, omega - parseval);
  h.upperBound = make_report("heat_content_bound", h.value + h.truncationBound, std::exp(-eig.eigenvalues.front() * t) * omega, relTol);
  return h;
}

double heat_content_interval(double L, double t, double tol) {
  if (!(L > 0.0) || !(t > 0.0)) throw DomainError("interval heat content needs L > 0 and t > 0");
  const double c = 8.0 * L / (kPi * kPi);
  const double rate = t * kPi * kPi / (L * L);
  double s = 0.0;
  for (long j = 1;; j += 2) {
    const double jj = static_cast<double>(j);
    s += c / (jj * jj) * std::exp(-rate * jj * jj);
    const double next = jj + 2.0;
    const double tail = c * std::exp(-rate * next * next) / (2.0 * (jj + 1.0));
    if (tail < tol) break;
    if (j > 200000000) throw DomainError("interval heat content series did not converge");
  }
  return s;
}

BoundReport lemma54_check(const DomainSpec& horn, const EigenResult& eig, const Mesh& mesh, double t, double relTol) {
  if (!horn_check(horn)) throw DomainError("lemma54_check needs a horn-shaped staircase domain");
  const HeatContentReport q = heat_content_2d(eig, mesh, t);
  double rhs = 0.0;
  for (const auto& r : horn.rects) rhs += r.width() * heat_content_interval(r.height(), t, 1e-14);
  rhs += 4.0 * std::sqrt(t / kPi) * heat_content_interval(1.0, t, 1e-14);
  return make_report("lemma54", q.value + q.truncationBound, rhs, relTol);
}

int lemma43_nstar(const Profile& f, double cPlus) {
  if (!(cPlus > 0.0)) throw DomainError("c+ must be positive");
  for (int n = 1; n < 100000000; ++n)
    if (f(cPlus / std::sqrt(static_cast<double>(n))) >= 0.5) return n;
  throw DomainError("no admissible N* for this profile");
}

Lemma43Result lemma43_bound(const Profile& f, double cPlus, int n) {
  Lemma43Result r;
  r.nStar = lemma43_nstar(f, cPlus);
  if (n < r.nStar)
    throw DomainError("lambda1 bound requires n >= N* = " + std::to_string(r.nStar) + " (f(c+ n^-1/2) >= 1/2), got n = " +
                      std::to_string(n));
  const double mu = kPi * kPi;
  const double corr = kPi * kPi / (cPlus * cPlus * n) + 6.0 * mu * (1.0 - f(cPlus / std::sqrt(static_cast<double>(n))));
  r.bound = mu + corr;
  r.time = 1.0 / corr;
  return r;
}

double horn_localisation_bound(const Profile& f, int n) {
  const Lemma43Result l = lemma43_bound(f, f.cPlus(), n);
  const double mu = kPi * kPi;
  double integral = 0.0, areaF = 0.0;
  constexpr int kSub = 16;
  for (std::size_t i = 0; i + 1 < f.xs.size(); ++i) {
    const double a = f.xs[i], b = f.xs[i + 1], h = (b - a) / kSub;
    areaF += 0.5 * (f.fs[i] + f.fs[i + 1]) * (b - a);
    for (int s = 0; s < kSub; ++s) {
      const double fx = f(a + (s + 0.5) * h);
      if (fx > 0.0) integral += h * std::exp(l.time * mu * (1.0 - 1.0 / (fx * fx)));
    }
  }
  return std::numbers::e / areaF * (integral + std::sqrt(16.0 * l.time / (kPi * n * n)));
}

double nodal_axis_distance(std::span<const double> field, const Mesh& mesh) {
  check_field(field, mesh);
  double umax = 0.0;
  for (double v : field) umax = std::max(umax, std::abs(v));
  // Values below this are solver noise on a symmetric mesh.
  const double tiny = kNodalSignificance * umax;
  auto sign = [&](int i) {
    const std::size_t k = static_cast<std::size_t>(i);
    if (mesh.flags[k] != NodeFlag::Free || std::abs(field[k]) <= tiny) return 0;
    return field[k] > 0.0 ? 1 : -1;
  };
  // Negligible free nodes count as zeros when they have neighbours of both signs.
  std::vector<char> pos(mesh.num_nodes(), 0), neg(mesh.num_nodes(), 0);
  double dist = -1.0;
  for (const auto& t : mesh.tris)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      const int sa = sign(a), sb = sign(b);
      if (sa * sb < 0) {
        const double xm = 0.5 * (mesh.nodes[static_cast<std::size_t>(a)].x + mesh.nodes[static_cast<std::size_t>(b)].x);
        dist = std::max(dist, std::abs(xm));
      }
      for (auto [z, sz, so] : {std::tuple{a, sa, sb}, std::tuple{b, sb, sa}}) {
        if (so == 0 || sz != 0 || mesh.flags[static_cast<std::size_t>(z)] != NodeFlag::Free) continue;
        (so > 0 ? pos : neg)[static_cast<std::size_t>(z)] = 1;
      }
    }
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
    if (pos[i] && neg[i]) dist = std::max(dist, std::abs(mesh.nodes[i].x));
  if (dist < 0.0) throw DomainError("field has no sign change");
  return dist;
}

nlohmann::ordered_json to_json(const BoundReport& r) {
  return {{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack}, {"tolerance", r.tolerance}, {"satisfied", r.satisfied}};
}

nlohmann::ordered_json to_json(const ConcentrationProfile& p) {
  return {{"p", p.p}, {"totalMass", p.totalMass}, {"t", p.t}, {"mass", p.mass}};
}

nlohmann::ordered_json to_json(const HeatContentReport& h) {
  return {{"t", h.t}, {"value", h.value}, {"terms", h.terms}, {"truncationBound", h.truncationBound}, {"upperBound", to_json(h.upperBound)}};
}

void write_csv(std::ostream& os, const ConcentrationProfile& p) {
  os.precision(17);
  os << "t,mass\n";
  for (std::size_t i = 0; i < p.t.size(); ++i) os << p.t[i] << ',' << p.mass[i] << '\n';
}

void write_csv(std::ostream& os, const std::vector<BoundReport>& reports) {
  os.precision(17);
  os << "name,lhs,rhs,slack,tolerance,satisfied\n";
  for (const auto& r : reports)
    os << r.name << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ',' << r.tolerance << ',' << (r.satisfied ? 1 : 0) << '\n';
}

}  // namespace speclab
