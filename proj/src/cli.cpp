#include "speclab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

using Json = nlohmann::ordered_json;

// Field table shared by serialization and parsing.
struct Field {
  std::function<Json(const RunConfig&)> get;
  std::function<void(RunConfig&, const Json&)> set;
};

template <class T>
Field field(T RunConfig::*m) {
  return {[m](const RunConfig& c) { return Json(c.*m); }, [m](RunConfig& c, const Json& j) { c.*m = j.get<T>(); }};
}

template <class T>
Field optional_field(std::optional<T> RunConfig::*m) {
  return {[m](const RunConfig& c) { return c.*m ? Json(*(c.*m)) : Json(nullptr); },
          [m](RunConfig& c, const Json& j) {
            if (j.is_null())
              (c.*m).reset();
            else
              c.*m = j.get<T>();
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"experiment", field(&RunConfig::experiment)},
      {"domain", field(&RunConfig::domain)},
      {"bc", field(&RunConfig::bc)},
      {"rect", field(&RunConfig::rect)},
      {"eps", field(&RunConfig::eps)},
      {"theta", field(&RunConfig::theta)},
      {"delta", optional_field(&RunConfig::delta)},
      {"deltas", field(&RunConfig::deltas)},
      {"cs", field(&RunConfig::cs)},
      {"kappa", field(&RunConfig::kappa)},
      {"massTol", field(&RunConfig::massTol)},
      {"bracket", field(&RunConfig::bracket)},
      {"n", field(&RunConfig::n)},
      {"ns", field(&RunConfig::ns)},
      {"alpha", field(&RunConfig::alpha)},
      {"d", field(&RunConfig::d)},
      {"stripsPerN", field(&RunConfig::stripsPerN)},
      {"profile", field(&RunConfig::profile)},
      {"profileAlpha", field(&RunConfig::profileAlpha)},
      {"ts", field(&RunConfig::ts)},
      {"h", field(&RunConfig::h)},
      {"k", field(&RunConfig::k)},
      {"tol", field(&RunConfig::tol)},
      {"maxIterations", field(&RunConfig::maxIterations)},
      {"levelCheck", field(&RunConfig::levelCheck)},
      {"heatmaps", field(&RunConfig::heatmaps)},
      {"heatmapPixels", field(&RunConfig::heatmapPixels)},
      {"out", field(&RunConfig::out)},
      {"threads", field(&RunConfig::threads)},
  };
  return table;
}

const std::vector<std::string> kExperiments = {"solve", "dumbbell-sweep", "kappa-find", "comb", "horn",
                                               "horn-second", "neumann-sweep", "bounds", "heat-content"};

const std::vector<double> kDefaultCs = {0.001, 0.002, 0.00281, 0.00286, 0.00287, 0.00292,
                                        0.003, 0.0035, 0.004, 0.005, 0.0075, 0.01};

BoundaryCondition parse_bc(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::Dirichlet;
  if (s == "neumann") return BoundaryCondition::Neumann;
  throw ConfigError("bc must be dirichlet or neumann, got '" + s + "'");
}

Profile build_profile(const RunConfig& c) {
  if (c.profile == "triangle") return profile_triangle();
  if (c.profile == "alpha") return profile_alpha(c.profileAlpha);
  throw ConfigError("profile must be triangle or alpha, got '" + c.profile + "'");
}

void validate(const RunConfig& c) {
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end())
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (c.h < 0.0) throw ConfigError("h must be positive (or 0 for the default)");
  if (c.k < 0) throw ConfigError("k must be non-negative");
  if (!(c.tol >= 1e-12 && c.tol <= 1e-6)) throw ConfigError("tol must lie in [1e-12, 1e-6]");
  if (c.maxIterations < 1) throw ConfigError("maxIterations must be positive");
  if (c.threads < 1) throw ConfigError("threads must be positive");
  if (c.heatmapPixels < 1) throw ConfigError("heatmapPixels must be positive");
  if (!c.bracket.empty() && c.bracket.size() != 2) throw ConfigError("bracket needs two values");
  if (c.rect.size() != 4) throw ConfigError("rect needs four values x0,x1,y0,y1");
  parse_bc(c.bc);
}

int auto_k(const RunConfig& c) {
  if (c.k > 0) return c.k;
  static const std::map<std::string, int> defaults = {{"solve", 3},  {"dumbbell-sweep", 2}, {"kappa-find", 1},
                                                      {"comb", 1},   {"horn", 10},          {"horn-second", 3},
                                                      {"neumann-sweep", 4}, {"bounds", 10}, {"heat-content", 40}};
  return defaults.at(c.experiment);
}

std::vector<double> dumbbell_deltas(const RunConfig& c) {
  if (!c.deltas.empty()) return c.deltas;
  const double de = critical_delta(c.eps);
  std::vector<double> out;
  for (double cc : c.cs.empty() ? kDefaultCs : c.cs) out.push_back(de - cc);
  return out;
}

std::vector<double> neumann_deltas(const RunConfig& c) {
  return c.deltas.empty() ? std::vector<double>{-0.05, -0.04491, -0.039} : c.deltas;
}

std::vector<int> study_ns(const RunConfig& c) {
  if (!c.ns.empty()) return c.ns;
  if (c.experiment == "comb") return {2, 4, 8};
  if (c.experiment == "horn") return {4, 8, 16, 32};
  return {4, 8, 16};
}

/// Domains whose meshes the run builds, for the default mesh size.
std::vector<DomainSpec> run_domains(const RunConfig& c) {
  std::vector<DomainSpec> out;
  if (c.experiment == "dumbbell-sweep") {
    for (double d : dumbbell_deltas(c)) out.push_back(make_dumbbell_dirichlet(c.eps, c.theta, d));
  } else if (c.experiment == "kappa-find") {
    out.push_back(make_dumbbell_dirichlet(c.eps, c.theta, critical_delta(c.eps)));
  } else if (c.experiment == "comb") {
    for (int n : study_ns(c)) out.push_back(make_comb(n, c.alpha, c.d));
  } else if (c.experiment == "horn" || c.experiment == "horn-second") {
    for (int n : study_ns(c)) out.push_back(make_horn({build_profile(c), n, c.stripsPerN * n}));
  } else if (c.experiment == "neumann-sweep") {
    for (double d : neumann_deltas(c)) out.push_back(make_neumann_dumbbell(d, c.theta));
  } else {
    out.push_back(build_domain(c));
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json error_line(int code, const std::string& message) {
  return Json{{"status", "error"}, {"code", code}, {"message", message}};
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& c) {
  Json j;
  for (const auto& [name, f] : fields()) j[name] = f.get(c);
  return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields().begin(), fields().end(), [&](const auto& p) { return p.first == key; });
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second.set(base, value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  return base;
}

DomainSpec build_domain(const RunConfig& c) {
  const BoundaryCondition bc = parse_bc(c.bc);
  if (c.domain == "unit-square") return make_unit_square(bc);
  if (c.domain == "rectangle") return make_rectangle(c.rect[0], c.rect[1], c.rect[2], c.rect[3], bc);
  if (c.domain == "r-eps") return make_r_eps(c.eps);
  if (c.domain == "dumbbell") return make_dumbbell_dirichlet(c.eps, c.theta, c.delta.value_or(critical_delta(c.eps)));
  if (c.domain == "neumann-dumbbell") return make_neumann_dumbbell(c.delta.value_or(0.0), c.theta);
  if (c.domain == "comb") return make_comb(c.n, c.alpha, c.d);
  if (c.domain == "horn") return make_horn({build_profile(c), c.n, c.stripsPerN * c.n});
  throw ConfigError("unknown domain '" + c.domain + "'");
}

double default_h(const DomainSpec& spec) { return std::min(0.02, feature_size(spec) / 6.0); }

SweepResult run_experiment(const RunConfig& c) {
  validate(c);
  StudySettings s;
  s.k = auto_k(c);
  s.eigen.tol = c.tol;
  s.eigen.maxIterations = c.maxIterations;
  s.levelCheck = c.levelCheck;
  s.heatmaps = c.heatmaps;
  s.heatmapPixels = c.heatmapPixels;
  s.threads = c.threads;
  s.hTarget = c.h;
  if (s.hTarget == 0.0) {
    s.hTarget = 0.02;
    for (const auto& d : run_domains(c)) s.hTarget = std::min(s.hTarget, default_h(d));
  }

  const std::vector<double> ts = c.ts.empty() ? std::vector<double>{0.05, 0.1, 0.2} : c.ts;
  SweepResult r;
  const std::string& e = c.experiment;
  if (e == "solve") {
    r = solve_study(build_domain(c), s);
  } else if (e == "dumbbell-sweep") {
    r = dumbbell_sweep(c.eps, c.theta, dumbbell_deltas(c), s);
  } else if (e == "kappa-find") {
    KappaSearchSpec k;
    k.eps = c.eps;
    k.theta = c.theta;
    k.kappaTarget = c.kappa;
    k.massTol = c.massTol;
    if (!c.bracket.empty()) k.deltaLo = c.bracket[0], k.deltaHi = c.bracket[1];
    r = find_kappa_delta(k, s);
  } else if (e == "comb") {
    r = comb_study(study_ns(c), c.alpha, c.d, s);
  } else if (e == "horn" || e == "horn-second") {
    HornStudySpec h;
    h.profile = build_profile(c);
    h.ns = study_ns(c);
    h.stripsPerN = c.stripsPerN;
    h.heatTimes = c.ts;
    r = e == "horn" ? horn_study(h, s) : horn_second_eigen_study(h, s);
  } else if (e == "neumann-sweep") {
    r = neumann_sweep(c.theta, neumann_deltas(c), s);
  } else if (e == "bounds") {
    r = bounds_suite(build_domain(c), s, ts);
  } else {
    std::optional<HornSpec> horn;
    if (c.domain == "horn") horn = HornSpec{build_profile(c), c.n, c.stripsPerN * c.n};
    r = heat_content_study(build_domain(c), ts, s, horn);
  }
  Json echo = to_json(c);
  echo.erase("out");
  echo["resolved"] = Json{{"h", s.hTarget}, {"k", s.k}};
  r.config = std::move(echo);
  return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"speclab: eigenfunction localisation experiments"};
  app.require_subcommand(1);

  // Values given on the command line are applied after the config file.
  std::vector<std::function<void(RunConfig&)>> overrides;
  std::string configPath;
  std::optional<int> threadsFlag;

  auto add = [&]<class T>(CLI::App* sub, const std::string& flag, T RunConfig::*member, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = sub->add_option(flag, *value, help);
    if constexpr (requires { value->begin(); } && !std::is_same_v<T, std::string>) opt->delimiter(',');
    overrides.push_back([opt, value, member](RunConfig& c) {
      if (opt->count() > 0) c.*member = *value;
    });
  };
  auto addDelta = [&](CLI::App* sub) {
    auto value = std::make_shared<double>();
    CLI::Option* opt = sub->add_option("--delta", *value, "Square half-side (dumbbell) or tube offset (neumann-dumbbell)");
    overrides.push_back([opt, value](RunConfig& c) {
      if (opt->count() > 0) c.delta = *value;
    });
  };

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : kExperiments) {
    CLI::App* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "Print this help message and exit");
    subs[name] = sub;
    sub->add_option("--config", configPath, "JSON config file");
    sub->add_option("--threads", threadsFlag, "Worker threads (default: SPECLAB_THREADS or 1)");
    add(sub, "--out", &RunConfig::out, "Output directory");
    add(sub, "--h", &RunConfig::h, "Target mesh size (0: experiment default)");
    add(sub, "--k", &RunConfig::k, "Number of eigenpairs (0: experiment default)");
    add(sub, "--tol", &RunConfig::tol, "Eigensolver residual tolerance");
    add(sub, "--max-iterations", &RunConfig::maxIterations, "Cap on operator applications");
    add(sub, "--level-check", &RunConfig::levelCheck, "Repeat rows on the coarser level (true/false)");
    add(sub, "--heatmaps", &RunConfig::heatmaps, "Write field_<row>.pgm (true/false)");
    add(sub, "--heatmap-pixels", &RunConfig::heatmapPixels, "Heatmap size along the longer side");
  }
  for (const char* name : {"solve", "bounds", "heat-content"}) {
    CLI::App* sub = subs[name];
    add(sub, "--domain", &RunConfig::domain, "unit-square, rectangle, r-eps, dumbbell, neumann-dumbbell, comb, horn");
    add(sub, "--bc", &RunConfig::bc, "dirichlet or neumann (unit-square, rectangle)");
    add(sub, "--rect", &RunConfig::rect, "x0,x1,y0,y1");
    add(sub, "--eps", &RunConfig::eps, "Rectangle half-width");
    add(sub, "--theta", &RunConfig::theta, "Tube half-width");
    addDelta(sub);
    add(sub, "--n", &RunConfig::n, "Comb teeth or horn elongation");
    add(sub, "--alpha", &RunConfig::alpha, "Comb exponent");
    add(sub, "--d", &RunConfig::d, "Comb gap constant");
    add(sub, "--strips-per-n", &RunConfig::stripsPerN, "Horn staircase strips per unit of n");
    add(sub, "--profile", &RunConfig::profile, "Horn profile: triangle or alpha");
    add(sub, "--profile-alpha", &RunConfig::profileAlpha, "Exponent of the alpha profile");
  }
  for (const char* name : {"bounds", "heat-content", "horn", "horn-second"})
    add(subs[name], "--ts", &RunConfig::ts, "Heat-content times");
  for (const char* name : {"dumbbell-sweep", "kappa-find"}) {
    add(subs[name], "--eps", &RunConfig::eps, "Rectangle half-width");
    add(subs[name], "--theta", &RunConfig::theta, "Tube half-width");
  }
  add(subs["dumbbell-sweep"], "--deltas", &RunConfig::deltas, "Square half-sides");
  add(subs["dumbbell-sweep"], "--cs", &RunConfig::cs, "Offsets below the critical half-side");
  add(subs["kappa-find"], "--kappa", &RunConfig::kappa, "Target mass on tube and square");
  add(subs["kappa-find"], "--mass-tol", &RunConfig::massTol, "Tolerance on |F - kappa|");
  add(subs["kappa-find"], "--bracket", &RunConfig::bracket, "deltaLo,deltaHi");
  for (const char* name : {"comb", "horn", "horn-second"}) add(subs[name], "--ns", &RunConfig::ns, "Values of n");
  add(subs["comb"], "--alpha", &RunConfig::alpha, "Comb exponent");
  add(subs["comb"], "--d", &RunConfig::d, "Comb gap constant");
  for (const char* name : {"horn", "horn-second"}) {
    add(subs[name], "--strips-per-n", &RunConfig::stripsPerN, "Staircase strips per unit of n");
    add(subs[name], "--profile", &RunConfig::profile, "triangle or alpha");
    add(subs[name], "--profile-alpha", &RunConfig::profileAlpha, "Exponent of the alpha profile");
  }
  add(subs["neumann-sweep"], "--theta", &RunConfig::theta, "Tube half-width");
  add(subs["neumann-sweep"], "--deltas", &RunConfig::deltas, "Tube length offsets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    out << error_line(kExitConfig, e.what()).dump() << '\n';
    return kExitConfig;
  }

  RunConfig cfg;
  std::filesystem::path outDir;
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  try {
    if (const char* env = std::getenv("SPECLAB_THREADS")) {
      try {
        cfg.threads = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("SPECLAB_THREADS is not an integer: ") + env);
      }
    }
    if (!configPath.empty()) {
      std::ifstream f(configPath);
      if (!f) throw ConfigError("cannot read config file " + configPath);
      Json j;
      try {
        j = Json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
      cfg = run_config_from_json(j, cfg);
    }
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) cfg.experiment = name;
    for (const auto& o : overrides) o(cfg);
    if (threadsFlag) cfg.threads = *threadsFlag;
    outDir = cfg.out;

    const SweepResult r = run_experiment(cfg);
    write_artifacts(r, outDir, cfg.threads);

    const std::size_t failed = r.failed_rows();
    const bool enough = r.rows.empty() || 10 * (r.rows.size() - failed) >= 9 * r.rows.size();
    Json warnings = Json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i)
      if (!r.rows[i].ok) warnings.push_back("row " + std::to_string(i) + ": " + r.rows[i].error);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    {
      std::ofstream log(outDir / "run.log");
      log << started << " start " << cfg.experiment << '\n';
      log << utc_now() << " end rows=" << r.rows.size() << " failed=" << failed << " elapsed_s=" << elapsed << '\n';
    }
    Json line{{"status", enough ? "ok" : "error"}, {"experiment", cfg.experiment}, {"out", outDir.string()},
              {"rows", r.rows.size()}, {"failedRows", failed}};
    if (!warnings.empty()) line["warnings"] = warnings;
    line["summary"] = r.summary;
    out << line.dump() << '\n';
    return enough ? kExitOk : kExitSolver;
  } catch (const SolverError& e) {
    out << error_line(kExitSolver, e.what()).dump() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    out << error_line(kExitConfig, e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    out << error_line(kExitConfig, e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    out << error_line(kExitSolver, e.what()).dump() << '\n';
    return kExitSolver;
  }
}

}  // namespace speclab
