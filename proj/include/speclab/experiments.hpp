#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/analysis.hpp"
#include "speclab/geometry.hpp"
#include "speclab/mesh.hpp"
#include "speclab/solve.hpp"

namespace speclab {

struct StudySettings {
  double hTarget = 0.02;
  /// Number of eigenpairs; experiments raise it to what they need.
  int k = 1;
  EigenOptions eigen;
  /// Repeat every row on the mesh with twice the target size and report the
  /// absolute differences under "levelDelta".
  bool levelCheck = true;
  bool heatmaps = true;
  /// Pixels along the longer side of the bounding box.
  int heatmapPixels = 256;
  int threads = 1;
};

/// Grey raster of u^2 on the bounding box, row 0 at the top. 0 is outside the
/// domain; inside values map linearly onto [1, 255].
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

Heatmap rasterize_squared(std::span<const double> field, const Mesh& mesh, int longSide);
/// Plain (ASCII) PGM.
void write_pgm(std::ostream& os, const Heatmap& map);

struct SweepRow {
  /// Parameters first, then metrics. Non-finite numbers are stored as null.
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  bool ok = true;
  std::string error;
  std::optional<Heatmap> heatmap;
};

struct SweepResult {
  std::string experiment;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<SweepRow> rows;  ///< in parameter order
  /// Mesh and fields of the first successful row, for mesh.vtk.
  std::shared_ptr<const Mesh> mesh;
  std::vector<std::pair<std::string, std::vector<double>>> meshFields;

  std::size_t failed_rows() const;
  /// Flattened column names ("a.b" for nested objects) in first-seen order.
  std::vector<std::string> columns() const;
  nlohmann::ordered_json to_json(int threads) const;
};

/// Evaluates fn(i) for i < count on a pool of `threads` workers and returns
/// the rows in index order. SolverError and DomainError flag the row; any
/// other exception is rethrown after all workers stop (lowest index first).
std::vector<SweepRow> run_rows(std::size_t count, int threads, const std::function<SweepRow(std::size_t)>& fn);

/// result.json, sweep.csv, field_<row>.pgm and mesh.vtk in dir.
void write_artifacts(const SweepResult& result, const std::filesystem::path& dir, int threads);
void write_csv(std::ostream& os, const SweepResult& result);

/// One solved discretisation.
struct Discretisation {
  Mesh mesh;
  ReducedSystem system;
  EigenResult eigen;
};

Discretisation discretise_and_solve(const DomainSpec& spec, double hTarget, int k, const EigenOptions& opts);

/// Eigenpairs of a single domain, one row per pair.
SweepResult solve_study(const DomainSpec& spec, const StudySettings& s);

/// Rows over delta for the Dirichlet dumbbell: F is the mass at x > eps (tube
/// and square), massR the mass on R_eps; they partition the domain.
SweepResult dumbbell_sweep(double eps, double theta, const std::vector<double>& deltas, const StudySettings& s);

struct KappaSearchSpec {
  double eps = 0.4;
  double theta = 0.2;
  double kappaTarget = 0.5;
  double massTol = 1e-3;
  /// Defaults to critical_delta(eps) -/+ 0.01.
  std::optional<double> deltaLo;
  std::optional<double> deltaHi;
  int maxIterations = 60;
};

/// Bisection in delta at fixed theta until |F - kappa| <= massTol. Rows hold
/// the iterates (the two bracket ends first); the summary holds the result.
/// Throws DomainError when F does not cross kappa on the bracket and
/// SolverError when the bisection stalls.
SweepResult find_kappa_delta(const KappaSearchSpec& spec, const StudySettings& s);

struct HornStudySpec {
  Profile profile = profile_triangle();
  std::vector<int> ns{4, 8, 16};
  int stripsPerN = 8;
  /// Heat-content times checked in addition to t_n.
  std::vector<double> heatTimes;
};

SweepResult horn_study(const HornStudySpec& spec, const StudySettings& s);

/// Second eigenpair of a symmetric horn. nodalDistanceScaled is the nodal
/// distance divided by n, i.e. measured in the profile variable.
SweepResult horn_second_eigen_study(const HornStudySpec& spec, const StudySettings& s);

SweepResult comb_study(const std::vector<int>& ns, double alpha, double d, const StudySettings& s);

/// Neumann dumbbell rows over delta. Near a double eigenvalue the region
/// masses are those of the projector onto the two-dimensional block.
SweepResult neumann_sweep(double theta, const std::vector<double>& deltas, const StudySettings& s);

/// Faber-Krahn, Kohler-Jobin, torsion sup, sup-norm, heat-content and Hardy
/// checks on one Dirichlet domain, one row per check. Tolerances are ten
/// times the solver tolerance, relative.
SweepResult bounds_suite(const DomainSpec& spec, const StudySettings& s, const std::vector<double>& heatTimes = {0.05, 0.1, 0.2});

/// Heat content and its upper bounds at the given times. With a horn the
/// strip comparison is reported as well.
SweepResult heat_content_study(const DomainSpec& spec, const std::vector<double>& times, const StudySettings& s,
                               const std::optional<HornSpec>& horn = std::nullopt);

}  // namespace speclab
