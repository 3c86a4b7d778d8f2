#include "speclab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string time_key(const std::string& prefix, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@%g", prefix.c_str(), t);
  return buf;
}

Json report_json(const BoundReport& r) {
  return Json{{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"slack", number(r.slack)}, {"satisfied", r.satisfied}};
}

using Metrics = std::function<Json(const Discretisation&)>;

/// Twice the target size when the geometry allows it, one uniform refinement
/// otherwise.
Mesh companion_mesh(const DomainSpec& spec, const Mesh& mesh, double hTarget) {
  try {
    return triangulate(spec, 2.0 * hTarget);
  } catch (const ResolutionError&) {
    return refine(mesh);
  }
}

void add_level_delta(Json& row, const Json& fine, const Json& coarse, double companionH) {
  Json delta = Json::object();
  delta["hMax"] = companionH;
  for (const auto& [key, value] : fine.items()) {
    if (!value.is_number_float() || !coarse.contains(key) || !coarse[key].is_number()) continue;
    delta[key] = number(std::abs(value.get<double>() - coarse[key].get<double>()));
  }
  row["levelDelta"] = std::move(delta);
}

/// Solve one row: params, metrics on the target mesh, bookkeeping, optional
/// companion level and heatmap.
SweepRow solve_row(const DomainSpec& spec, Json params, int k, const StudySettings& s, const Metrics& metrics,
                   int heatIndex, std::shared_ptr<const Discretisation>* keep = nullptr) {
  auto d = std::make_shared<Discretisation>(discretise_and_solve(spec, s.hTarget, k, s.eigen));
  SweepRow row;
  row.values = std::move(params);
  const Json m = metrics(*d);
  for (const auto& [key, value] : m.items()) row.values[key] = value;
  row.values["dofs"] = d->system.dofs.num_dofs();
  row.values["hMax"] = d->mesh.hMax;
  row.values["maxResidual"] = *std::max_element(d->eigen.residuals.begin(), d->eigen.residuals.end());
  row.values["operatorApplications"] = d->eigen.operatorApplications;
  if (s.levelCheck) {
    Discretisation c;
    c.mesh = companion_mesh(spec, d->mesh, s.hTarget);
    c.system = assemble_reduced(c.mesh);
    c.eigen = smallest_eigenpairs(c.system, k, s.eigen);
    add_level_delta(row.values, m, metrics(c), c.mesh.hMax);
  }
  if (s.heatmaps && heatIndex < static_cast<int>(d->eigen.size()))
    row.heatmap = rasterize_squared(d->eigen.vectors[static_cast<std::size_t>(heatIndex)], d->mesh, s.heatmapPixels);
  if (keep) *keep = d;
  return row;
}

void attach_mesh(SweepResult& r, const std::shared_ptr<const Discretisation>& d) {
  if (!d) return;
  r.mesh = std::shared_ptr<const Mesh>(d, &d->mesh);
  for (std::size_t j = 0; j < std::min<std::size_t>(d->eigen.size(), 3); ++j)
    r.meshFields.emplace_back("u" + std::to_string(j + 1), d->eigen.vectors[j]);
}

/// Rows of a parameter sweep; the mesh of row 0 is kept for mesh.vtk.
template <class Param>
SweepResult sweep(std::string name, const std::vector<Param>& params, const StudySettings& s,
                  const std::function<SweepRow(const Param&, std::shared_ptr<const Discretisation>*)>& fn) {
  SweepResult r;
  r.experiment = std::move(name);
  std::shared_ptr<const Discretisation> first;
  r.rows = run_rows(params.size(), s.threads, [&](std::size_t i) { return fn(params[i], i == 0 ? &first : nullptr); });
  attach_mesh(r, first);
  return r;
}

double mass_where(const Discretisation& d, std::size_t j, const Region& region) {
  return mass_on_region(d.eigen.vectors[j], d.mesh, region);
}

void require_dirichlet(const DomainSpec& spec, const char* what) {
  if (spec.bc != BoundaryCondition::Dirichlet) throw DomainError(std::string(what) + " requires a Dirichlet domain");
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object())
      flatten(value, name, out);
    else
      out.emplace_back(name, value);
  }
}

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

}  // namespace

Heatmap rasterize_squared(std::span<const double> field, const Mesh& mesh, int longSide) {
  if (field.size() != mesh.num_nodes()) throw DomainError("field size does not match the mesh");
  if (longSide < 1) throw DomainError("heatmap needs at least one pixel");
  double x0 = mesh.nodes[0].x, x1 = x0, y0 = mesh.nodes[0].y, y1 = y0;
  for (const Point& p : mesh.nodes) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const double w = x1 - x0, h = y1 - y0;
  Heatmap img;
  if (w >= h) {
    img.width = longSide;
    img.height = std::max(1, static_cast<int>(std::lround(longSide * h / w)));
  } else {
    img.height = longSide;
    img.width = std::max(1, static_cast<int>(std::lround(longSide * w / h)));
  }
  const double dx = w / img.width, dy = h / img.height;
  std::vector<double> value(static_cast<std::size_t>(img.width) * img.height, -1.0);
  for (const auto& t : mesh.tris) {
    const Point a = mesh.nodes[static_cast<std::size_t>(t[0])], b = mesh.nodes[static_cast<std::size_t>(t[1])],
                c = mesh.nodes[static_cast<std::size_t>(t[2])];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const int i0 = std::max(0, static_cast<int>(std::floor((std::min({a.x, b.x, c.x}) - x0) / dx - 0.5)));
    const int i1 = std::min(img.width - 1, static_cast<int>(std::ceil((std::max({a.x, b.x, c.x}) - x0) / dx - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::floor((std::min({a.y, b.y, c.y}) - y0) / dy - 0.5)));
    const int j1 = std::min(img.height - 1, static_cast<int>(std::ceil((std::max({a.y, b.y, c.y}) - y0) / dy - 0.5)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const double px = x0 + (i + 0.5) * dx, py = y0 + (j + 0.5) * dy;
        const double l1 = ((px - a.x) * (c.y - a.y) - (c.x - a.x) * (py - a.y)) / det;
        const double l2 = ((b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y)) / det;
        const double l0 = 1.0 - l1 - l2;
        constexpr double e = -1e-12;
        if (l0 < e || l1 < e || l2 < e) continue;
        const double u = l0 * field[static_cast<std::size_t>(t[0])] + l1 * field[static_cast<std::size_t>(t[1])] +
                         l2 * field[static_cast<std::size_t>(t[2])];
        value[static_cast<std::size_t>(img.height - 1 - j) * img.width + i] = u * u;
      }
  }
  double vmax = 0.0;
  for (double v : value) vmax = std::max(vmax, v);
  img.pixels.resize(value.size());
  for (std::size_t p = 0; p < value.size(); ++p) {
    if (value[p] < 0.0)
      img.pixels[p] = 0;
    else
      img.pixels[p] = static_cast<std::uint8_t>(1 + std::lround(vmax > 0.0 ? 254.0 * value[p] / vmax : 0.0));
  }
  return img;
}

void write_pgm(std::ostream& os, const Heatmap& map) {
  os << "P2\n" << map.width << ' ' << map.height << "\n255\n";
  for (int j = 0; j < map.height; ++j) {
    for (int i = 0; i < map.width; ++i) {
      if (i) os << ' ';
      os << static_cast<int>(map.pixels[static_cast<std::size_t>(j) * map.width + i]);
    }
    os << '\n';
  }
}

std::size_t SweepResult::failed_rows() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok; }));
}

std::vector<std::string> SweepResult::columns() const {
  std::vector<std::string> cols;
  for (const auto& row : rows) {
    std::vector<std::pair<std::string, Json>> flat;
    flatten(row.values, "", flat);
    for (const auto& [name, value] : flat)
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
  }
  return cols;
}

nlohmann::ordered_json SweepResult::to_json(int threads) const {
  Json j;
  j["experiment"] = experiment;
  j["config"] = config;
  j["environment"] = Json{{"library", "speclab 1.0"}, {"threads", threads}};
  j["summary"] = summary;
  j["failedRows"] = failed_rows();
  Json rs = Json::array();
  for (const auto& row : rows) {
    Json r;
    r["ok"] = row.ok;
    if (!row.ok) r["error"] = row.error;
    for (const auto& [key, value] : row.values.items()) r[key] = value;
    rs.push_back(std::move(r));
  }
  j["rows"] = std::move(rs);
  return j;
}

std::vector<SweepRow> run_rows(std::size_t count, int threads, const std::function<SweepRow(std::size_t)>& fn) {
  std::vector<SweepRow> rows(count);
  std::vector<std::exception_ptr> fatal(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        rows[i] = fn(i);
      } catch (const SolverError& e) {
        rows[i].ok = false;
        rows[i].error = e.what();
      } catch (const DomainError& e) {
        rows[i].ok = false;
        rows[i].error = e.what();
      } catch (...) {
        fatal[i] = std::current_exception();
      }
    }
  };
  const std::size_t nThreads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(count, 1));
  if (nThreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nThreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_csv(std::ostream& os, const SweepResult& result) {
  const auto cols = result.columns();
  os << "ok,error";
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  for (const auto& row : result.rows) {
    std::vector<std::pair<std::string, Json>> flat;
    flatten(row.values, "", flat);
    os << (row.ok ? "true" : "false") << ',' << csv_cell(row.error);
    for (const auto& c : cols) {
      auto it = std::find_if(flat.begin(), flat.end(), [&](const auto& p) { return p.first == c; });
      os << ',' << (it == flat.end() ? std::string() : csv_cell(it->second));
    }
    os << '\n';
  }
}

void write_artifacts(const SweepResult& result, const std::filesystem::path& dir, int threads) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("result.json");
    f << result.to_json(threads).dump(2) << '\n';
  }
  {
    auto f = open("sweep.csv");
    write_csv(f, result);
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    if (result.rows[i].heatmap) {
      auto f = open("field_" + std::to_string(i) + ".pgm");
      write_pgm(f, *result.rows[i].heatmap);
    }
  if (result.mesh) {
    auto f = open("mesh.vtk");
    write_vtk(*result.mesh, f, result.meshFields);
  }
}

Discretisation discretise_and_solve(const DomainSpec& spec, double hTarget, int k, const EigenOptions& opts) {
  Discretisation d;
  d.mesh = triangulate(spec, hTarget);
  d.system = assemble_reduced(d.mesh);
  d.eigen = smallest_eigenpairs(d.system, k, opts);
  return d;
}

SweepResult solve_study(const DomainSpec& spec, const StudySettings& s) {
  const int k = std::max(s.k, 1);
  auto d = std::make_shared<Discretisation>(discretise_and_solve(spec, s.hTarget, k, s.eigen));
  SweepResult r;
  r.experiment = "solve";
  std::optional<EigenResult> coarse;
  double coarseH = 0.0;
  if (s.levelCheck) {
    const Mesh cm = companion_mesh(spec, d->mesh, s.hTarget);
    coarse = smallest_eigenpairs(assemble_reduced(cm), k, s.eigen);
    coarseH = cm.hMax;
  }
  for (std::size_t j = 0; j < d->eigen.size(); ++j) {
    SweepRow row;
    row.values["index"] = j + 1;
    row.values["lambda"] = d->eigen.eigenvalues[j];
    row.values["residual"] = d->eigen.residuals[j];
    row.values["gapFlagNext"] = j < d->eigen.multiplicityGapFlag.size() && d->eigen.multiplicityGapFlag[j];
    if (coarse)
      row.values["levelDelta"] = Json{{"hMax", coarseH}, {"lambda", std::abs(d->eigen.eigenvalues[j] - coarse->eigenvalues[j])}};
    if (s.heatmaps) row.heatmap = rasterize_squared(d->eigen.vectors[j], d->mesh, s.heatmapPixels);
    r.rows.push_back(std::move(row));
  }
  r.summary = Json{{"domain", spec.label},
                   {"lambda1", d->eigen.eigenvalues[0]},
                   {"area", area(spec)},
                   {"dofs", d->system.dofs.num_dofs()},
                   {"hMax", d->mesh.hMax},
                   {"operatorApplications", d->eigen.operatorApplications}};
  attach_mesh(r, d);
  return r;
}

SweepResult dumbbell_sweep(double eps, double theta, const std::vector<double>& deltas, const StudySettings& s) {
  const double deltaEps = critical_delta(eps);
  const int k = std::max(s.k, 2);
  std::function<SweepRow(const double&, std::shared_ptr<const Discretisation>*)> fn =
      [&](const double& delta, std::shared_ptr<const Discretisation>* keep) {
        const DomainSpec spec = make_dumbbell_dirichlet(eps, theta, delta);
        const double A = area(spec);
        return solve_row(spec, Json{{"delta", delta}, {"c", deltaEps - delta}}, k, s,
                         [&](const Discretisation& d) {
                           const double F = mass_where(d, 0, [eps](Point p) { return p.x > eps; });
                           const double R = mass_where(d, 0, [eps](Point p) { return p.x <= eps; });
                           return Json{{"lambda1", d.eigen.eigenvalues[0]},
                                       {"lambda2", d.eigen.eigenvalues[1]},
                                       {"F", F},
                                       {"massR", R},
                                       {"partitionError", std::abs(F + R - 1.0)},
                                       {"participationRatio", participation_ratio(d.eigen.vectors[0], d.mesh, A)},
                                       {"fkSlack", check_faber_krahn(d.eigen.eigenvalues[0], A).slack}};
                         },
                         0, keep);
      };
  SweepResult r = sweep<double>("dumbbell-sweep", sorted(deltas), s, fn);
  bool monotone = true;
  double prev = -1.0;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const double F = row.values["F"].get<double>();
    monotone = monotone && F >= prev - 1e-12;
    prev = F;
  }
  r.summary = Json{{"eps", eps}, {"theta", theta}, {"criticalDelta", deltaEps}, {"FMonotoneInDelta", monotone}};
  return r;
}

SweepResult find_kappa_delta(const KappaSearchSpec& spec, const StudySettings& s) {
  if (!(spec.kappaTarget > 0.0 && spec.kappaTarget < 1.0)) throw DomainError("kappa must lie in (0, 1)");
  if (!(spec.massTol > 0.0)) throw DomainError("massTol must be positive");
  const double deltaEps = critical_delta(spec.eps);
  const double lo0 = spec.deltaLo.value_or(deltaEps - 0.01), hi0 = spec.deltaHi.value_or(deltaEps + 0.01);
  if (!(lo0 < hi0)) throw DomainError("kappa bracket must satisfy deltaLo < deltaHi");

  StudySettings inner = s;
  inner.levelCheck = false;
  const int k = std::max(s.k, 1);
  auto evaluate = [&](int iteration, double delta) {
    const DomainSpec dom = make_dumbbell_dirichlet(spec.eps, spec.theta, delta);
    return solve_row(dom, Json{{"iteration", iteration}, {"delta", delta}, {"c", deltaEps - delta}}, k, inner,
                     [&](const Discretisation& d) {
                       const double F = mass_where(d, 0, [&](Point p) { return p.x > spec.eps; });
                       return Json{{"lambda1", d.eigen.eigenvalues[0]}, {"F", F}, {"massR", 1.0 - F}};
                     },
                     0);
  };
  SweepResult r;
  r.experiment = "kappa-find";
  r.rows = run_rows(2, s.threads, [&](std::size_t i) { return evaluate(0, i == 0 ? lo0 : hi0); });
  for (const auto& row : r.rows)
    if (!row.ok) throw SolverError("kappa bracket evaluation failed: " + row.error);
  const double fLo = r.rows[0].values["F"].get<double>(), fHi = r.rows[1].values["F"].get<double>();
  if (!(fLo < spec.kappaTarget && spec.kappaTarget < fHi)) {
    std::ostringstream os;
    os << "F does not cross kappa=" << spec.kappaTarget << " on [" << lo0 << ", " << hi0 << "] (F = " << fLo << ", "
       << fHi << "); try a thinner tube (smaller theta) or a wider bracket";
    throw DomainError(os.str());
  }
  double lo = lo0, hi = hi0;
  const SweepRow* best = nullptr;
  for (int it = 1; it <= spec.maxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    SweepRow row = evaluate(it, mid);
    if (!row.ok) throw SolverError("kappa bisection solve failed: " + row.error);
    const double F = row.values["F"].get<double>();
    r.rows.push_back(std::move(row));
    if (std::abs(F - spec.kappaTarget) <= spec.massTol) {
      best = &r.rows.back();
      break;
    }
    (F < spec.kappaTarget ? lo : hi) = mid;
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
  }
  if (!best) throw SolverError("kappa bisection stalled: F jumps across kappa within the bracket resolution");
  const double deltaStar = best->values["delta"].get<double>();
  r.summary = Json{{"eps", spec.eps},
                   {"theta", spec.theta},
                   {"kappa", spec.kappaTarget},
                   {"deltaStar", deltaStar},
                   {"cStar", deltaEps - deltaStar},
                   {"F", best->values["F"]},
                   {"massR", best->values["massR"]},
                   {"lambda1", best->values["lambda1"]},
                   {"iterations", static_cast<int>(r.rows.size()) - 2}};
  if (s.levelCheck) {
    const DomainSpec dom = make_dumbbell_dirichlet(spec.eps, spec.theta, deltaStar);
    const Mesh fine = triangulate(dom, s.hTarget);
    const Mesh cm = companion_mesh(dom, fine, s.hTarget);
    const auto eig = smallest_eigenpairs(assemble_reduced(cm), k, s.eigen);
    const double F = mass_on_region(eig.vectors[0], cm, [&](Point p) { return p.x > spec.eps; });
    r.summary["levelDelta"] = Json{{"hMax", cm.hMax}, {"F", std::abs(F - best->values["F"].get<double>())}};
  }
  return r;
}

SweepResult horn_study(const HornStudySpec& spec, const StudySettings& s) {
  validate_profile(spec.profile);
  const int k = std::max(s.k, 1);
  const int nStar = lemma43_nstar(spec.profile, spec.profile.cPlus());
  std::function<SweepRow(const int&, std::shared_ptr<const Discretisation>*)> fn =
      [&](const int& n, std::shared_ptr<const Discretisation>* keep) {
        const DomainSpec dom = make_horn({spec.profile, n, spec.stripsPerN * n});
        const double A = area(dom);
        std::optional<Lemma43Result> l43;
        if (n >= nStar) l43 = lemma43_bound(spec.profile, spec.profile.cPlus(), n);
        std::vector<double> times = spec.heatTimes;
        return solve_row(dom, Json{{"n", n}, {"strips", spec.stripsPerN * n}}, k, s,
                         [&](const Discretisation& d) {
                           const double l1 = d.eigen.eigenvalues[0];
                           const auto prof = concentration_profile(d.eigen.vectors[0], d.mesh, 2.0);
                           Json m{{"lambda1", l1}, {"area", A}};
                           m["lemma43Bound"] = l43 ? Json(l43->bound) : Json(nullptr);
                           m["lemma43Ok"] = l43 ? Json(l1 <= 1.02 * l43->bound) : Json(nullptr);
                           m["participationRatio"] = participation_ratio(d.eigen.vectors[0], d.mesh, A);
                           m["profile@0.05"] = prof(0.05);
                           m["profile@0.1"] = prof(0.1);
                           if (l43) {
                             const auto q = heat_content_2d(d.eigen, d.mesh, l43->time);
                             m["tn"] = l43->time;
                             m["heatContent"] = q.value;
                             m["heatTruncation"] = q.truncationBound;
                             m["heatBoundSlack"] = q.upperBound.slack;
                             m["lemma54Slack"] = lemma54_check(dom, d.eigen, d.mesh, l43->time).slack;
                             m["localisationBound"] = horn_localisation_bound(spec.profile, n);
                           }
                           for (double t : times) {
                             const auto rep = lemma54_check(dom, d.eigen, d.mesh, t);
                             m[time_key("lemma54Slack", t)] = rep.slack;
                             m[time_key("lemma54Ok", t)] = rep.satisfied;
                           }
                           return m;
                         },
                         0, keep);
      };
  std::vector<int> ns = spec.ns;
  std::sort(ns.begin(), ns.end());
  SweepResult r = sweep<int>("horn", ns, s, fn);
  bool decreasing = true;
  double prev = 2.0;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const double pr = row.values["participationRatio"].get<double>();
    decreasing = decreasing && pr < prev;
    prev = pr;
  }
  r.summary = Json{{"nStar", nStar}, {"participationStrictlyDecreasing", decreasing}};
  return r;
}

SweepResult horn_second_eigen_study(const HornStudySpec& spec, const StudySettings& s) {
  validate_profile(spec.profile);
  const Profile& f = spec.profile;
  bool symmetric = std::abs(f.cMinus() + f.cPlus()) <= 1e-12;
  for (double x : f.xs) symmetric = symmetric && std::abs(f(x) - f(-x)) <= 1e-12;
  if (!symmetric) throw DomainError("horn_second_eigen_study needs a profile symmetric about 0");
  const int k = std::max(s.k, 3);
  std::function<SweepRow(const int&, std::shared_ptr<const Discretisation>*)> fn =
      [&](const int& n, std::shared_ptr<const Discretisation>* keep) {
        const DomainSpec dom = make_horn({f, n, spec.stripsPerN * n});
        const double A = area(dom);
        return solve_row(dom, Json{{"n", n}, {"strips", spec.stripsPerN * n}}, k, s,
                         [&](const Discretisation& d) {
                           const double dist = nodal_axis_distance(d.eigen.vectors[1], d.mesh);
                           return Json{{"lambda1", d.eigen.eigenvalues[0]},
                                       {"lambda2", d.eigen.eigenvalues[1]},
                                       {"lambda3", d.eigen.eigenvalues[2]},
                                       {"gapFlag23", static_cast<bool>(d.eigen.multiplicityGapFlag[1])},
                                       {"nodalDistance", dist},
                                       {"nodalDistanceScaled", dist / n},
                                       {"nodalLimit", d.mesh.hMax + 1.0 / n},
                                       {"participationRatio2", participation_ratio(d.eigen.vectors[1], d.mesh, A)}};
                         },
                         1, keep);
      };
  std::vector<int> ns = spec.ns;
  std::sort(ns.begin(), ns.end());
  SweepResult r = sweep<int>("horn-second", ns, s, fn);
  bool nonIncreasing = true, decreasingPR = true;
  double prevD = 1e300, prevPR = 2.0;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const double dist = row.values["nodalDistance"].get<double>(), pr = row.values["participationRatio2"].get<double>();
    nonIncreasing = nonIncreasing && dist <= prevD;
    decreasingPR = decreasingPR && pr < prevPR;
    prevD = dist, prevPR = pr;
  }
  r.summary = Json{{"nodalDistanceNonIncreasing", nonIncreasing}, {"participation2StrictlyDecreasing", decreasingPR}};
  return r;
}

SweepResult comb_study(const std::vector<int>& ns, double alpha, double d, const StudySettings& s) {
  const int k = std::max(s.k, 1);
  std::function<SweepRow(const int&, std::shared_ptr<const Discretisation>*)> fn =
      [&](const int& n, std::shared_ptr<const Discretisation>* keep) {
        const DomainSpec dom = make_comb(n, alpha, d);
        const double A = area(dom);
        const double eta = 1.0 / (2.0 * n);
        const double top = 1.0 - 2.0 * d * std::pow(static_cast<double>(n), -alpha);
        return solve_row(dom, Json{{"n", n}, {"eta", eta}}, k, s,
                         [&](const Discretisation& disc) {
                           const DistanceField dist = distance_field(disc.mesh);
                           const auto h = theorem41_hypotheses(dom, disc.mesh, dist, eta);
                           const double l1 = disc.eigen.eigenvalues[0];
                           const auto hardy = hardy_quantities(disc.eigen.vectors[0], l1, dist, disc.mesh);
                           return Json{{"lambda1", l1},
                                       {"fraction", h.fraction},
                                       {"ratio", h.ratio},
                                       {"maxDistance", h.maxDistance},
                                       {"hypothesisRatio", std::pow(static_cast<double>(n), alpha - 1.0) / d},
                                       {"topStripMass", mass_where(disc, 0, [top](Point p) { return p.y > top; })},
                                       {"participationRatio", participation_ratio(disc.eigen.vectors[0], disc.mesh, A)},
                                       {"fkSlack", check_faber_krahn(l1, A).slack},
                                       {"hardySlack", hardy.bound.slack},
                                       {"hardyExcludedMass", hardy.excludedMass}};
                         },
                         0, keep);
      };
  std::vector<int> sortedNs = ns;
  std::sort(sortedNs.begin(), sortedNs.end());
  SweepResult r = sweep<int>("comb", sortedNs, s, fn);
  bool increasing = true;
  double prev = -1.0;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const double m = row.values["topStripMass"].get<double>();
    increasing = increasing && m > prev;
    prev = m;
  }
  r.summary = Json{{"alpha", alpha}, {"d", d}, {"topStripMassStrictlyIncreasing", increasing}};
  return r;
}

SweepResult neumann_sweep(double theta, const std::vector<double>& deltas, const StudySettings& s) {
  const int k = std::max(s.k, 4);
  std::function<SweepRow(const double&, std::shared_ptr<const Discretisation>*)> fn =
      [&](const double& delta, std::shared_ptr<const Discretisation>* keep) {
        const DomainSpec dom = make_neumann_dumbbell(delta, theta);
        const double tube = std::pow(kPi / (2.0 + 2.0 * delta), 2), square = kPi * kPi / 4.0;
        return solve_row(dom, Json{{"delta", delta}}, k, s,
                         [&](const Discretisation& d) {
                           const bool degenerate = d.eigen.multiplicityGapFlag[1];
                           const Region inR = [](Point p) { return p.x > 0.0; };
                           const Region inS = [](Point p) { return p.x < 0.0; };
                           double mR = mass_where(d, 1, inR), mS = mass_where(d, 1, inS);
                           if (degenerate) {
                             mR = 0.5 * (mR + mass_where(d, 2, inR));
                             mS = 0.5 * (mS + mass_where(d, 2, inS));
                           }
                           const double mu1 = d.eigen.eigenvalues[1];
                           const double limit = std::min(tube, square);
                           return Json{{"mu0", d.eigen.eigenvalues[0]},
                                       {"mu1", mu1},
                                       {"mu2", d.eigen.eigenvalues[2]},
                                       {"degenerate", degenerate},
                                       {"massR", mR},
                                       {"massS", mS},
                                       {"partitionError", std::abs(mR + mS - 1.0)},
                                       {"limitTube", tube},
                                       {"limitSquare", square},
                                       {"limitMin", limit},
                                       {"mu1RelativeToLimit", std::abs(mu1 - limit) / limit}};
                         },
                         1, keep);
      };
  SweepResult r = sweep<double>("neumann-sweep", sorted(deltas), s, fn);
  r.summary = Json{{"theta", theta}};
  return r;
}

SweepResult bounds_suite(const DomainSpec& spec, const StudySettings& s, const std::vector<double>& heatTimes) {
  require_dirichlet(spec, "bounds_suite");
  const int k = std::max(s.k, 1);
  const double relTol = 10.0 * s.eigen.tol;
  auto d = std::make_shared<Discretisation>(discretise_and_solve(spec, s.hTarget, k, s.eigen));
  const double A = area(spec), l1 = d->eigen.eigenvalues[0];
  const TorsionResult tor = solve_torsion(d->system, d->mesh);
  const DistanceField dist = distance_field(d->mesh);

  std::vector<std::pair<BoundReport, Json>> checks;
  checks.push_back({check_faber_krahn(l1, A, relTol), Json::object()});
  checks.push_back({check_kohler_jobin(tor.rigidity, l1, relTol), Json::object()});
  checks.push_back({check_torsion_sup(l1, tor, relTol), Json::object()});
  checks.push_back({check_supnorm_bound(l1, d->eigen.vectors[0], d->mesh, relTol), Json::object()});
  for (double t : heatTimes) {
    const auto q = heat_content_2d(d->eigen, d->mesh, t, relTol);
    BoundReport rep = q.upperBound;
    rep.name = time_key("heat_content_bound", t);
    checks.push_back({rep, Json{{"terms", q.terms}, {"truncationBound", q.truncationBound}}});
  }
  for (std::size_t j = 0; j < d->eigen.size(); ++j) {
    const auto h = hardy_quantities(d->eigen.vectors[j], d->eigen.eigenvalues[j], dist, d->mesh, relTol);
    BoundReport rep = h.bound;
    rep.name = "hardy@k=" + std::to_string(j + 1);
    checks.push_back({rep, Json{{"excludedMass", h.excludedMass}, {"excludedElements", h.excludedElements}}});
  }

  SweepResult r;
  r.experiment = "bounds";
  bool all = true;
  for (auto& [rep, extra] : checks) {
    SweepRow row;
    row.values = Json{{"check", rep.name}, {"lhs", number(rep.lhs)}, {"rhs", number(rep.rhs)},
                      {"slack", number(rep.slack)}, {"tolerance", rep.tolerance}, {"satisfied", rep.satisfied}};
    for (const auto& [key, value] : extra.items()) row.values[key] = value;
    all = all && rep.satisfied;
    r.rows.push_back(std::move(row));
  }
  r.summary = Json{{"domain", spec.label}, {"lambda1", l1}, {"area", A}, {"rigidity", tor.rigidity},
                   {"torsionSup", tor.supNorm}, {"allSatisfied", all}};
  if (s.levelCheck) {
    const Mesh cm = companion_mesh(spec, d->mesh, s.hTarget);
    const auto eig = smallest_eigenpairs(assemble_reduced(cm), 1, s.eigen);
    r.summary["levelDelta"] = Json{{"hMax", cm.hMax}, {"lambda1", std::abs(eig.eigenvalues[0] - l1)}};
  }
  attach_mesh(r, d);
  return r;
}

SweepResult heat_content_study(const DomainSpec& spec, const std::vector<double>& times, const StudySettings& s,
                               const std::optional<HornSpec>& horn) {
  require_dirichlet(spec, "heat_content_study");
  const int k = std::max(s.k, 1);
  auto d = std::make_shared<Discretisation>(discretise_and_solve(spec, s.hTarget, k, s.eigen));
  SweepResult r;
  r.experiment = "heat-content";
  for (double t : sorted(times)) {
    if (!(t > 0.0)) throw DomainError("heat content needs t > 0");
    const auto q = heat_content_2d(d->eigen, d->mesh, t);
    SweepRow row;
    row.values = Json{{"t", t}, {"heatContent", q.value}, {"terms", q.terms}, {"truncationBound", q.truncationBound},
                      {"upperBound", report_json(q.upperBound)}};
    if (horn) row.values["lemma54"] = report_json(lemma54_check(spec, d->eigen, d->mesh, t));
    r.rows.push_back(std::move(row));
  }
  r.summary = Json{{"domain", spec.label}, {"pairs", d->eigen.size()}, {"lambda1", d->eigen.eigenvalues[0]},
                   {"lambdaLast", d->eigen.eigenvalues.back()}, {"area", area(spec)}};
  if (s.levelCheck) {
    const Mesh cm = companion_mesh(spec, d->mesh, s.hTarget);
    const auto eig = smallest_eigenpairs(assemble_reduced(cm), 1, s.eigen);
    r.summary["levelDelta"] = Json{{"hMax", cm.hMax}, {"lambda1", std::abs(eig.eigenvalues[0] - d->eigen.eigenvalues[0])}};
  }
  attach_mesh(r, d);
  return r;
}

}  // namespace speclab
