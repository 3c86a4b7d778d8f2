#pragma once

// Independent reference values shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "speclab/mesh.hpp"

namespace oracle {

/// Torsional rigidity of the unit square from the double sine series.
inline double square_rigidity_series() {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int i = 1; i < 400; i += 2)
    for (int j = 1; j < 400; j += 2) s += 64.0 / (std::pow(pi, 6) * i * i * j * j * (i * i + j * j));
  return s;
}

/// Torsion function of the unit square at its centre.
inline double square_centre_series() {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int i = 1; i < 2000; i += 2)
    for (int j = 1; j < 2000; j += 2) {
      const double si = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
      const double sj = ((j / 2) % 2 == 0) ? 1.0 : -1.0;
      s += 16.0 / (std::pow(pi, 4) * i * j * (i * i + j * j)) * si * sj;
    }
  return s;
}

/// Dual form of the concentration profile: for densities rho_e, the largest
/// mass on measure s|Omega| is min over thresholds tau of
/// tau s |Omega| + sum |e| (rho_e - tau)+.
inline double profile(const std::vector<double>& masses, const speclab::Mesh& m, double s) {
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  const double area = m.total_area();
  std::vector<double> taus{0.0};
  for (std::size_t e = 0; e < masses.size(); ++e) taus.push_back(masses[e] / m.elementArea[e]);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  double best = 1e300;
  for (double tau : taus) {
    double v = tau * s * area;
    for (std::size_t e = 0; e < masses.size(); ++e) v += m.elementArea[e] * std::max(0.0, masses[e] / m.elementArea[e] - tau);
    best = std::min(best, v);
  }
  return best / total;
}

}  // namespace oracle
