#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "speclab/geometry.hpp"
#include "speclab/mesh.hpp"
#include "speclab/solve.hpp"

namespace speclab {

/// First zero of the Bessel function J0.
inline constexpr double kBesselJ01 = 2.404825557695773;

/// Integral of |f|^p over each element. p = 2 is exact for P1 fields; other
/// exponents use the vertex rule.
std::vector<double> element_masses(std::span<const double> field, const Mesh& mesh, double p);

/// Integral of a P1 field.
double integrate(std::span<const double> field, const Mesh& mesh);

/// Map from area fraction t to the largest fraction of the total mass that a
/// union of elements of measure t|Omega| can carry, interpolated linearly
/// inside an element.
struct ConcentrationProfile {
  double p = 2.0;
  double totalMass = 0.0;
  std::vector<double> t;     ///< 0 = t_0 < t_1 < ... < t_m = 1
  std::vector<double> mass;  ///< mass(t_i), 0 = mass_0 <= ... <= mass_m = 1

  double operator()(double s) const;
};

ConcentrationProfile concentration_profile(std::span<const double> field, const Mesh& mesh, double p);
/// Same for a field that is constant on each element.
ConcentrationProfile concentration_profile_cellwise(std::span<const double> elementValues, const Mesh& mesh, double p);

/// ||f||_1^2 / (|Omega| ||f||_2^2), in (0, 1].
double participation_ratio(std::span<const double> field, const Mesh& mesh, double domainArea);
double participation_ratio_cellwise(std::span<const double> elementValues, const Mesh& mesh, double domainArea);

/// Fraction of ||u||_2^2 carried by elements whose centroid lies in the region.
double mass_on_region(std::span<const double> field, const Mesh& mesh, const Region& region);

/// Total area of elements whose centroid lies in the region.
double region_measure(const Mesh& mesh, const Region& region);

/// Inequality check in the form lhs <= rhs.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;      ///< rhs - lhs
  double tolerance = 0.0;  ///< absolute
  bool satisfied = false;  ///< slack >= -tolerance
};

/// Reports use a relative tolerance of this size unless given explicitly.
inline constexpr double kDefaultBoundTolerance = 1e-8;

BoundReport make_report(std::string name, double lhs, double rhs, double relTol = kDefaultBoundTolerance);

/// ||u||_inf <= (e / 4 pi)^(1/2) lambda1^(1/2) for an L2-normalised u.
BoundReport check_supnorm_bound(double lambda1, std::span<const double> field, const Mesh& mesh,
                                double relTol = kDefaultBoundTolerance);
/// pi j01^2 <= lambda1 |Omega|.
BoundReport check_faber_krahn(double lambda1, double area, double relTol = kDefaultBoundTolerance);
/// ||v||_inf <= (4 + 6 log 2) / lambda1.
BoundReport check_torsion_sup(double lambda1, const TorsionResult& torsion, double relTol = kDefaultBoundTolerance);
/// (pi / 8) j01^4 <= T lambda1^2.
BoundReport check_kohler_jobin(double rigidity, double lambda1, double relTol = kDefaultBoundTolerance);

/// Exact distance to the boundary at nodes and element centroids.
struct DistanceField {
  std::vector<double> nodal;
  std::vector<double> centroid;
};

DistanceField distance_field(const Mesh& mesh);
/// Largest nodal distance (a lower bound of the true maximum).
double max_distance(const DistanceField& d);

struct HardyReport {
  BoundReport bound;          ///< integral of u^2/d^2 <= 16 lambda_k
  double integral = 0.0;      ///< over elements without boundary or slit nodes
  double excludedMass = 0.0;  ///< fraction of ||u||^2 on the skipped elements
  std::size_t excludedElements = 0;
};

/// Centroid quadrature of u^2/d^2 for an L2-normalised field, skipping
/// elements that touch the boundary or a slit.
HardyReport hardy_quantities(std::span<const double> field, double lambdaK, const DistanceField& d, const Mesh& mesh,
                             double relTol = kDefaultBoundTolerance);

struct Theorem41Quantities {
  double eta = 0.0;
  double fraction = 0.0;  ///< |{d < eta}| / |Omega|
  double ratio = 0.0;     ///< min(eta / max d, 1)
  double maxDistance = 0.0;
};

Theorem41Quantities theorem41_hypotheses(const DomainSpec& spec, const Mesh& mesh, double eta);
Theorem41Quantities theorem41_hypotheses(const DomainSpec& spec, const Mesh& mesh, const DistanceField& d, double eta);

struct HeatContentReport {
  double t = 0.0;
  double value = 0.0;            ///< sum over the available pairs
  int terms = 0;
  double truncationBound = 0.0;  ///< bound on the omitted tail
  BoundReport upperBound;               ///< value + truncationBound <= exp(-lambda1 t) |Omega|
};

/// Q(t) = sum_j exp(-lambda_j t) (integral u_j)^2 over the pairs in eig.
HeatContentReport heat_content_2d(const EigenResult& eig, const Mesh& mesh, double t,
                                  double relTol = kDefaultBoundTolerance);

/// Heat content of an interval of length L with cold ends, summed until the
/// tail bound falls below tol.
double heat_content_interval(double L, double t, double tol = 1e-12);

/// lhs: Q(t) plus its truncation bound; rhs: sum over strips of
/// length * Q'(width, t) plus 4 (t/pi)^(1/2) Q'(1, t).
BoundReport lemma54_check(const DomainSpec& horn, const EigenResult& eig, const Mesh& mesh, double t,
                          double relTol = kDefaultBoundTolerance);

struct Lemma43Result {
  int nStar = 0;
  double bound = 0.0;
  double time = 0.0;  ///< inverse of the two correction terms of the bound
};

/// Smallest n with f(c+ n^(-1/2)) >= 1/2, and for n >= nStar the upper bound
/// pi^2 + pi^2/(c+^2 n) + 6 pi^2 (1 - f(c+ n^(-1/2))). Throws DomainError when
/// n < nStar.
Lemma43Result lemma43_bound(const Profile& f, double cPlus, int n);
int lemma43_nstar(const Profile& f, double cPlus);

/// Upper bound on (integral u1)^2 / |Omega| for the horn with profile f
/// elongated by n, evaluated at t = lemma43_bound(...).time.
double horn_localisation_bound(const Profile& f, int n);

/// Nodal values below this fraction of max |u| count as zero.
inline constexpr double kNodalSignificance = 1e-4;

/// Largest |x| of the zero crossings of a sign-changing field: midpoints of
/// edges between free nodes of opposite sign, and negligible free nodes with
/// neighbours of both signs. Throws DomainError when the field has no sign
/// change.
double nodal_axis_distance(std::span<const double> field, const Mesh& mesh);

nlohmann::ordered_json to_json(const BoundReport& r);
nlohmann::ordered_json to_json(const ConcentrationProfile& p);
nlohmann::ordered_json to_json(const HeatContentReport& h);

void write_csv(std::ostream& os, const ConcentrationProfile& p);
void write_csv(std::ostream& os, const std::vector<BoundReport>& reports);

}  // namespace speclab
