#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "speclab/errors.hpp"
#include "speclab/geometry.hpp"

using namespace speclab;

namespace {

// Independent oracle: inclusion-exclusion over all rectangle subsets.
double area_inclusion_exclusion(const std::vector<Rect>& rs) {
  const std::size_t n = rs.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double x0 = -1e300, x1 = 1e300, y0 = -1e300, y1 = 1e300;
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) {
        ++bits;
        x0 = std::max(x0, rs[i].x0);
        x1 = std::min(x1, rs[i].x1);
        y0 = std::max(y0, rs[i].y0);
        y1 = std::min(y1, rs[i].y1);
      }
    const double a = std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
    total += (bits % 2 ? 1.0 : -1.0) * a;
  }
  return total;
}

}  // namespace

TEST_CASE("dumbbell area and preconditions") {
  const auto d = make_dumbbell_dirichlet(0.4, 0.2, 0.5);
  CHECK(d.rects.size() == 3);
  CHECK(area(d) == doctest::Approx(5.44).epsilon(1e-13));
  CHECK(area(d) == doctest::Approx(area_inclusion_exclusion(d.rects)).epsilon(1e-13));
  CHECK_THROWS_AS(make_dumbbell_dirichlet(1.0, 0.2, 0.5), GeometryError);
  CHECK_THROWS_AS(make_dumbbell_dirichlet(0.4, 0.5, 0.5), GeometryError);
  CHECK_NOTHROW(make_dumbbell_dirichlet(0.4, 0.2, critical_delta(0.4)));
}

TEST_CASE("critical delta matches the first eigenvalues of square and rectangle") {
  CHECK(critical_delta(0.4) == doctest::Approx(0.5585808).epsilon(1e-7));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int i = 1; i <= 9; ++i) {
    const double e = 0.1 * i;
    const double dl = critical_delta(e);
    CHECK(std::abs(pi2 / (2 * dl * dl) - pi2 / 4 * (e * e + 1 / (e * e))) < 1e-12 * pi2 / (2 * dl * dl));
  }
}

TEST_CASE("comb") {
  const auto c = make_comb(4, 0.5, 0.5);
  REQUIRE(c.slits.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.slits[i].a.x == doctest::Approx(0.25 * double(i + 1)));
    CHECK(c.slits[i].length() == doctest::Approx(0.75));
  }
  CHECK(area(c) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_comb(2, 0.5, 1.5), GeometryError);
  CHECK(distance_to_boundary(c, {0.5, 0.875}) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("comb distance between slits is at most 1/(2n)") {
  const int n = 8;
  const double alpha = 0.5, d = 0.5;
  const DomainGeometry g(make_comb(n, alpha, d));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double top = 1.0 - d * std::pow(n, -alpha);
  for (int s = 0; s < 2000; ++s) {
    const Point p{u(rng), u(rng) * top};
    if (!g.contains_interior(p)) continue;
    CHECK(g.distance_to_boundary(p) <= 1.0 / (2 * n) + 1e-14);
  }
}

TEST_CASE("distance is 1-Lipschitz and exact on simple points") {
  const auto dumb = make_dumbbell_dirichlet(0.4, 0.2, 0.5);
  const DomainGeometry g(dumb);
  CHECK(g.distance_to_boundary({1.0, 0.0}) == doctest::Approx(0.2));
  CHECK(distance_to_boundary(make_unit_square(), {0.5, 0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(g.distance_to_boundary({1.0, 0.5}), GeometryError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-0.4, 2.5), uy(-2.5, 2.5);
  std::vector<Point> pts;
  while (pts.size() < 300) {
    const Point p{ux(rng), uy(rng)};
    if (g.contains_interior(p)) pts.push_back(p);
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[i + 1];
    CHECK(std::abs(g.distance_to_boundary(p) - g.distance_to_boundary(q)) <= std::hypot(p.x - q.x, p.y - q.y) + 1e-12);
  }
}

TEST_CASE("random unions: compressed area equals inclusion-exclusion") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Rect> rs{{0.0, 1.0, 0.0, 1.0}};
    for (int i = 0; i < 4; ++i) {
      const double x0 = u(rng) * 0.9, y0 = u(rng) * 0.9;
      rs.push_back({x0, x0 + 0.1 + u(rng), y0, y0 + 0.1 + u(rng)});
    }
    DomainSpec s{rs, {}, BoundaryCondition::Dirichlet, "random", std::nullopt};
    CHECK(area(s) == doctest::Approx(area_inclusion_exclusion(rs)).epsilon(1e-12));
  }
}

TEST_CASE("disconnected union rejected") {
  DomainSpec s{{{0, 1, 0, 1}, {2, 3, 0, 1}}, {}, BoundaryCondition::Dirichlet, "two", std::nullopt};
  CHECK_THROWS_AS(validate(s), GeometryError);
  DomainSpec corner{{{0, 1, 0, 1}, {1, 2, 1, 2}}, {}, BoundaryCondition::Dirichlet, "corner", std::nullopt};
  CHECK_THROWS_AS(validate(corner), GeometryError);
}

TEST_CASE("profiles") {
  const auto a1 = profile_alpha(1.0);
  CHECK(a1(0.25) == doctest::Approx(0.5));
  const auto a2 = profile_alpha(2.0);
  CHECK(a2(0.25) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-5));
  for (double al : {1.0, 1.5, 3.0}) {
    const auto p = profile_alpha(al);
    CHECK(p(0.0) == doctest::Approx(1.0));
    CHECK(p(0.5) == doctest::Approx(0.0));
    CHECK(p(-0.5) == doctest::Approx(0.0));
    CHECK_NOTHROW(validate_profile(p));
  }
  CHECK_THROWS_AS(profile_alpha(0.5), GeometryError);
  Profile flat{{-1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(validate_profile(flat), GeometryError);
}

TEST_CASE("horn staircase") {
  const auto h = make_horn({profile_triangle(), 1, 4});
  REQUIRE(h.rects.size() == 4);
  std::vector<double> half;
  for (const auto& r : h.rects) half.push_back(r.y1);
  CHECK(half[0] == doctest::Approx(0.25));
  CHECK(half[1] == doctest::Approx(0.5));
  CHECK(half[2] == doctest::Approx(0.5));
  CHECK(half[3] == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_horn({profile_triangle(), 2, 7}), GeometryError);

  const auto big = make_horn({profile_alpha(1.0), 4, 64});
  // Half-widths non-increasing away from 0 on each side.
  for (const auto& r : big.rects)
    for (const auto& s : big.rects) {
      const bool sameSide = (r.x0 >= 0) == (s.x0 >= 0);
      const double dr = r.x0 >= 0 ? r.x0 : -r.x1;
      const double ds = s.x0 >= 0 ? s.x0 : -s.x1;
      if (sameSide && dr < ds) CHECK(r.y1 >= s.y1);
    }
}

TEST_CASE("neumann dumbbell") {
  const auto d = make_neumann_dumbbell(0.0, 0.02);
  CHECK(d.bc == BoundaryCondition::Neumann);
  // S has area 2 and the tube 2 * 0.02 * 1.
  CHECK(area(d) == doctest::Approx(2.04).epsilon(1e-13));
  const auto s = make_neumann_dumbbell(-0.05, 0.02);
  CHECK(s.rects[1].width() == doctest::Approx(0.95));
  CHECK_THROWS_AS(make_neumann_dumbbell(0.0, 0.0), GeometryError);
}
