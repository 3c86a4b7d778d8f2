#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace speclab {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Open axis-aligned rectangle (x0,x1) x (y0,y1).
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains_open(Point p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
  bool contains_closed(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Closed axis-parallel segment removed from the domain.
struct Slit {
  Point a;
  Point b;

  bool vertical() const { return a.x == b.x; }
  double length() const;

  friend bool operator==(const Slit&, const Slit&) = default;
};

enum class BoundaryCondition { Dirichlet, Neumann };

/// A planar domain: union of open rectangles minus closed slits.
struct DomainSpec {
  std::vector<Rect> rects;
  std::vector<Slit> slits;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  std::string label;
  /// Length scale the mesher must resolve with at least four cells. When
  /// unset it is the smallest rectangle side of a multi-rectangle union or
  /// the smallest slit spacing; a lone rectangle without slits has none.
  std::optional<double> featureSize;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Throws GeometryError unless rectangles are valid and form a connected
/// union and every slit is axis-parallel, non-degenerate and inside the
/// closure of the union.
void validate(const DomainSpec& spec);

/// Exact area of the rectangle union (slits have measure zero).
double area(const DomainSpec& spec);

/// Smallest length the mesh has to resolve (see DomainSpec::featureSize).
double feature_size(const DomainSpec& spec);

struct Segment {
  Point a;
  Point b;
};

double point_segment_distance(Point p, const Segment& s);

/// Precomputed exact geometry of a domain: the compressed coordinate grid of
/// all rectangle corners, its inside/outside cell mask and the boundary
/// segments of the union. Immutable after construction.
class DomainGeometry {
public:
  explicit DomainGeometry(DomainSpec spec);

  const DomainSpec& spec() const { return spec_; }

  double area() const { return area_; }

  /// Point in the closure of the rectangle union.
  bool contains(Point p) const;
  /// Point in the open union and off every slit.
  bool contains_interior(Point p) const;

  bool on_outer_boundary(Point p) const;
  bool on_slit(Point p) const;

  /// Euclidean distance to the complement of the domain. Throws
  /// GeometryError if p lies outside the closure.
  double distance_to_boundary(Point p) const;

  const std::vector<Segment>& boundary_segments() const { return boundary_; }

  double xmin() const { return xs_.front(); }
  double xmax() const { return xs_.back(); }
  double ymin() const { return ys_.front(); }
  double ymax() const { return ys_.back(); }

private:
  bool cell_inside(std::ptrdiff_t i, std::ptrdiff_t j) const;
  double distance_unchecked(Point p) const;

  DomainSpec spec_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<char> inside_;  // (xs_.size()-1) x (ys_.size()-1), row-major in i
  std::vector<Segment> boundary_;
  std::vector<Segment> slits_;
  double area_ = 0.0;
};

/// Convenience wrapper building a DomainGeometry for a single query.
double distance_to_boundary(const DomainSpec& spec, Point p);

/// Piecewise-linear profile tabulated on increasing abscissae.
struct Profile {
  std::vector<double> xs;
  std::vector<double> fs;

  double operator()(double x) const;
  double cMinus() const { return xs.front(); }
  double cPlus() const { return xs.back(); }

  /// Tabulate g on [cMinus, cPlus] with at least `pointsPerUnit` samples per
  /// unit length; 0 is always a sample point.
  static Profile sample(const std::function<double(double)>& g, double cMinus, double cPlus,
                        int pointsPerUnit = 1025);

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// Throws GeometryError unless the profile belongs to the admissible monotone
/// class: f(0)=1, 0<=f<=1, f<1 off zero, non-increasing on [0,c+] and
/// non-decreasing on [c-,0].
void validate_profile(const Profile& f);

/// Triangle profile 1-|x| on [-1,1].
Profile profile_triangle();

/// (1-(2|x|)^alpha)^(1/alpha) on [-1/2,1/2], alpha >= 1.
Profile profile_alpha(double alpha);

struct HornSpec {
  Profile profile;
  int n = 1;       ///< elongation factor
  int strips = 4;  ///< total number of staircase strips over [n c-, n c+]
};

/// Dirichlet dumbbell R_eps u T_theta u S_delta.
DomainSpec make_dumbbell_dirichlet(double eps, double theta, double delta);

/// Half-side of the square whose first Dirichlet eigenvalue equals that of
/// the rectangle (-eps,eps) x (-1/eps,1/eps).
double critical_delta(double eps);

/// Unit square with n-1 vertical slits from (i/n,0) to (i/n, 1-d n^-alpha).
DomainSpec make_comb(int n, double alpha, double d);

/// Outer staircase approximation of the horn {|x2| < f(x1/n)/2}.
DomainSpec make_horn(const HornSpec& h);

/// Neumann dumbbell (-1,0)x(-1,1) u (0,1+delta)x(-theta,theta).
DomainSpec make_neumann_dumbbell(double delta, double theta);

DomainSpec make_rectangle(double x0, double x1, double y0, double y1,
                          BoundaryCondition bc = BoundaryCondition::Dirichlet,
                          std::string label = "rectangle");

DomainSpec make_unit_square(BoundaryCondition bc = BoundaryCondition::Dirichlet);

/// Rectangle (-eps,eps) x (-1/eps,1/eps).
DomainSpec make_r_eps(double eps);

/// Predicate over points, evaluated at element centroids.
using Region = std::function<bool(Point)>;

}  // namespace speclab
