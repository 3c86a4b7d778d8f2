// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "speclab/analysis.hpp"
#include "speclab/errors.hpp"
#include "speclab/experiments.hpp"

using namespace speclab;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Discretisation solve(const DomainSpec& spec, double h, int k, double tol = 1e-9) {
  EigenOptions o;
  o.tol = tol;
  return discretise_and_solve(spec, h, k, o);
}

StudySettings settings(double h, int k = 1) {
  StudySettings s;
  s.hTarget = h;
  s.k = k;
  s.levelCheck = false;
  s.heatmaps = false;
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome analytic_spectra() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  const double exact = 2 * pi * pi;
  std::vector<double> err;
  for (int n : {32, 64, 128}) err.push_back(solve(make_unit_square(), 1.0 / n, 1).eigen.eigenvalues[0] - exact);
  const double tSquare = seconds_since(t0);
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  o.require(std::abs(err[2]) / exact <= 0.005, fmt("square lambda1 rel err %.2e at h=1/128", std::abs(err[2]) / exact));
  o.require(r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5, fmt("error ratios %.3f %.3f", r1, r2));
  o.require(tSquare <= 60.0, fmt("%.1fs", tSquare));

  t0 = std::chrono::steady_clock::now();
  const double lr = solve(make_r_eps(0.4), 0.01, 1).eigen.eigenvalues[0];
  const double exactR = pi * pi / 4 * (0.16 + 6.25);
  const double tR = seconds_since(t0);
  o.require(rel(lr, exactR) <= 0.005 && tR <= 60.0, fmt("R_0.4 rel err %.2e (%.1fs)", rel(lr, exactR), tR));

  t0 = std::chrono::steady_clock::now();
  const auto neu = solve(make_unit_square(BoundaryCondition::Neumann), 1.0 / 64, 3);
  const double tN = seconds_since(t0);
  o.require(rel(neu.eigen.eigenvalues[1], pi * pi) <= 0.005 && tN <= 60.0,
            fmt("Neumann mu1 rel err %.2e (%.1fs)", rel(neu.eigen.eigenvalues[1], pi * pi), tN));
  return o;
}

Outcome critical_delta_identity() {
  Outcome o;
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double e = i / 10.0, d = critical_delta(e);
    worst = std::max(worst, std::abs(pi * pi / (2 * d * d) - pi * pi / 4 * (e * e + 1 / (e * e))));
  }
  o.require(worst <= 1e-12, fmt("max residual %.2e", worst));
  return o;
}

Outcome dumbbell_transition() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double de = critical_delta(0.4), h = 0.01;
  const std::vector<double> cs{0.001, 0.002, 0.0025, 0.00281, 0.00286, 0.00287, 0.00292, 0.003,
                               0.0031, 0.0032, 0.0033, 0.0034, 0.0035, 0.0036, 0.004, 0.005, 0.0075, 0.01};
  std::vector<double> deltas;
  for (double c : cs) deltas.push_back(de - c);
  const auto r = dumbbell_sweep(0.4, 0.2, deltas, settings(h, 2));
  // Rows run in increasing delta, i.e. decreasing c.
  bool crosses = false, partition = true;
  double cCross = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    partition = partition && r.rows[i].values["partitionError"].get<double>() <= 1e-10;
    if (i == 0) continue;
    const double Fa = r.rows[i - 1].values["F"].get<double>(), Fb = r.rows[i].values["F"].get<double>();
    if (Fa < 0.5 && Fb >= 0.5) {
      crosses = true;
      cCross = r.rows[i].values["c"].get<double>();
    }
  }
  o.require(r.failed_rows() == 0, "all rows solved");
  o.require(crosses && cCross >= 0.001 && cCross <= 0.01, fmt("F crosses 0.5 between c=%.4f and the next offset", cCross));
  o.require(r.summary["FMonotoneInDelta"].get<bool>(), "F monotone");
  o.require(partition, "partition identity");

  KappaSearchSpec k;
  k.eps = 0.4;
  k.theta = 0.2;
  k.kappaTarget = 0.5;
  const auto kr = find_kappa_delta(k, settings(h));
  const double F = kr.summary["F"].get<double>();
  o.require(std::abs(F - 0.5) <= 1e-3,
            fmt("kappa-find F=%.5f at c*=%.6f", F, kr.summary["cStar"].get<double>()));
  const double t = seconds_since(t0);
  o.require(t <= 900.0, fmt("%.1fs at h=%.3f", t, h));
  return o;
}

Outcome neumann_transition() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = neumann_sweep(0.02, {-0.05, -0.04491, -0.039}, settings(0.005, 4));
  o.require(r.failed_rows() == 0, "all rows solved");
  const double mHigh = r.rows[2].values["massR"].get<double>(), mMid = r.rows[1].values["massR"].get<double>(),
               mLow = r.rows[0].values["massR"].get<double>();
  o.require(mHigh > 0.7 && mLow < 0.3, fmt("massR %.3f (-0.039) %.3f (-0.04491) %.3f (-0.05)", mHigh, mMid, mLow));
  const auto thin = neumann_sweep(0.005, {-0.1, 0.1}, settings(0.0025, 4));
  for (const auto& row : thin.rows) {
    if (!row.ok) {
      o.require(false, "theta=0.005 row failed: " + row.error);
      continue;
    }
    const double err = row.values["mu1RelativeToLimit"].get<double>();
    o.require(err <= 0.1, fmt("delta=%+.1f mu1=%.5f limit %.5f (rel %.3f)", row.values["delta"].get<double>(),
                              row.values["mu1"].get<double>(), row.values["limitMin"].get<double>(), err));
  }
  o.detail += fmt(" (%.0fs)", seconds_since(t0));
  return o;
}

Outcome inequality_suite() {
  Outcome o;
  struct Case {
    std::string name;
    DomainSpec spec;
    double h;
  };
  const std::vector<Case> cases{
      {"square", make_unit_square(), 1.0 / 64},
      {"R_0.4", make_r_eps(0.4), 0.0125},
      {"dumbbell", make_dumbbell_dirichlet(0.4, 0.2, critical_delta(0.4) - 0.0028), 0.01},
      {"comb4", make_comb(4, 0.5, 0.5), 1.0 / 64},
      {"comb8", make_comb(8, 0.5, 0.5), 1.0 / 64},
      {"horn4", make_horn({profile_triangle(), 4, 32}), 1.0 / 32},
      {"horn8", make_horn({profile_triangle(), 8, 64}), 1.0 / 32},
  };
  for (const auto& c : cases) {
    const auto r = bounds_suite(c.spec, settings(c.h, 10));
    double minSlack = 1e300;
    std::string worst;
    bool all = true;
    for (const auto& row : r.rows) {
      const double slack = row.values["slack"].get<double>() / std::max(1e-300, std::abs(row.values["rhs"].get<double>()));
      if (!row.values["satisfied"].get<bool>()) {
        all = false;
        worst += " " + row.values["check"].get<std::string>();
      }
      if (slack < minSlack) {
        minSlack = slack;
        if (all) worst = " " + row.values["check"].get<std::string>();
      }
    }
    o.require(all, fmt("%s (%zu checks, min rel slack %.2e at%s)", c.name.c_str(), r.rows.size(), minSlack, worst.c_str()));
  }
  return o;
}

Outcome torsion_golden() {
  Outcome o;
  const double T = oracle::square_rigidity_series(), vc = oracle::square_centre_series();
  const Mesh m = triangulate(make_unit_square(), 1.0 / 128);
  const auto t = solve_torsion(assemble_reduced(m), m);
  o.require(rel(t.rigidity, T) <= 0.005, fmt("T=%.7f vs %.7f", t.rigidity, T));
  o.require(rel(t.supNorm, vc) <= 0.005, fmt("sup=%.6f vs %.6f", t.supNorm, vc));
  return o;
}

Outcome horn_eigenvalue_bound() {
  Outcome o;
  const Profile f = profile_triangle();
  o.require(lemma43_nstar(f, 1.0) == 4, fmt("N*=%d", lemma43_nstar(f, 1.0)));
  for (int n : {4, 8, 16}) {
    const double l1 = solve(make_horn({f, n, 8 * n}), 1.0 / 32, 1).eigen.eigenvalues[0];
    const double b = lemma43_bound(f, 1.0, n).bound;
    o.require(l1 <= 1.02 * b, fmt("n=%d lambda1=%.4f bound=%.4f", n, l1, b));
  }
  return o;
}

Outcome horn_heat_content() {
  Outcome o;
  const DomainSpec horn = make_horn({profile_triangle(), 4, 32});
  const auto d = solve(horn, 1.0 / 32, 40);
  o.require(d.eigen.size() >= 40, fmt("%zu pairs", d.eigen.size()));
  for (double t : {0.05, 0.1, 0.2}) {
    const auto rep = lemma54_check(horn, d.eigen, d.mesh, t);
    o.require(rep.slack >= 0.0, fmt("t=%.2f lhs=%.5f rhs=%.5f", t, rep.lhs, rep.rhs));
  }
  return o;
}

Outcome trends() {
  Outcome o;
  HornStudySpec h;
  h.ns = {4, 8, 16, 32};
  const auto hr = horn_study(h, settings(1.0 / 32));
  std::string prs;
  for (const auto& row : hr.rows) prs += fmt(" %.4f", row.values["participationRatio"].get<double>());
  o.require(hr.failed_rows() == 0 && hr.summary["participationStrictlyDecreasing"].get<bool>(),
            "horn PR strictly decreasing:" + prs);

  const auto cr = comb_study({2, 4, 8}, 0.5, 0.5, settings(1.0 / 64));
  std::string ms;
  for (const auto& row : cr.rows) ms += fmt(" %.4f", row.values["topStripMass"].get<double>());
  o.require(cr.failed_rows() == 0 && cr.summary["topStripMassStrictlyIncreasing"].get<bool>(),
            "comb top-strip mass increasing:" + ms);

  h.ns = {4, 8, 16};
  const auto sr = horn_second_eigen_study(h, settings(1.0 / 32, 3));
  std::string ds;
  bool bounded = sr.failed_rows() == 0;
  for (const auto& row : sr.rows) {
    ds += fmt(" %.3g", row.values["nodalDistance"].get<double>());
    bounded = bounded && row.values["nodalDistance"].get<double>() <= row.values["nodalLimit"].get<double>();
  }
  o.require(sr.summary["nodalDistanceNonIncreasing"].get<bool>() && bounded,
            "nodal distance non-increasing and <= hMax + 1/n:" + ds);
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  const auto d = solve(make_unit_square(), 1.0 / 64, 1);
  const auto& u = d.eigen.vectors[0];
  const auto cp = concentration_profile(u, d.mesh, 2.0);
  const auto masses = element_masses(u, d.mesh, 2.0);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) worst = std::max(worst, std::abs(cp(i / 20.0) - oracle::profile(masses, d.mesh, i / 20.0)));
  o.require(worst <= 1e-10, fmt("profile max deviation %.2e at 21 points", worst));
  const double pr = participation_ratio(u, d.mesh, 1.0), exact = 64 / std::pow(pi, 4);
  o.require(rel(pr, exact) <= 0.002, fmt("PR=%.6f vs %.6f", pr, exact));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"analytic spectra", analytic_spectra},
      {"critical-delta identity", critical_delta_identity},
      {"dumbbell mass transition", dumbbell_transition},
      {"neumann dumbbell transition", neumann_transition},
      {"inequality suite", inequality_suite},
      {"torsion golden values", torsion_golden},
      {"horn eigenvalue bound", horn_eigenvalue_bound},
      {"horn heat-content inequality", horn_heat_content},
      {"localisation trends", trends},
      {"metric oracles", metric_oracles},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    failures += r.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
