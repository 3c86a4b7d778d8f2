#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/experiments.hpp"

namespace speclab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Everything a run depends on. Zero h or k means the experiment default.
struct RunConfig {
  std::string experiment = "solve";

  std::string domain = "unit-square";
  std::string bc = "dirichlet";
  std::vector<double> rect{0.0, 1.0, 0.0, 1.0};
  double eps = 0.4;
  double theta = 0.2;
  std::optional<double> delta;
  std::vector<double> deltas;
  std::vector<double> cs;  ///< dumbbell offsets, delta = critical_delta(eps) - c
  double kappa = 0.5;
  double massTol = 1e-3;
  std::vector<double> bracket;
  int n = 4;
  std::vector<int> ns;
  double alpha = 0.5;
  double d = 0.5;
  int stripsPerN = 8;
  std::string profile = "triangle";
  double profileAlpha = 2.0;
  std::vector<double> ts;

  double h = 0.0;
  int k = 0;
  double tol = 1e-9;
  int maxIterations = 10000;
  bool levelCheck = true;
  bool heatmaps = true;
  int heatmapPixels = 256;

  std::string out = "speclab-out";
  int threads = 1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::ordered_json to_json(const RunConfig& c);
/// Overlays the keys of j onto base. Throws ConfigError on unknown keys or
/// values of the wrong type.
RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base = {});

/// Domain named by c.domain with its parameters.
DomainSpec build_domain(const RunConfig& c);

/// Mesh size used when c.h is zero: min(0.02, feature / 6).
double default_h(const DomainSpec& spec);

/// Runs the experiment of c; does not write files.
SweepResult run_experiment(const RunConfig& c);

/// Full command line: artifacts under --out, run.log with timestamps, one
/// JSON line on out. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace speclab
