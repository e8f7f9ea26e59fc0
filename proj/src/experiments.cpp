#include "snls/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "snls/parallel.hpp"

namespace snls {

using nlohmann::json;
namespace fs = std::filesystem;

static const char* kVersion = "snls-lab 0.1.0";

FieldState make_initial(const InitialRecipe& recipe, const GridSpec& grid,
                        Frame frame) {
  if (recipe.kind == "gaussian") {
    FieldState f = make_field(grid, frame, 0.0);
    const double w2 = 2.0 * recipe.width * recipe.width;
    for_each_point(grid, [&](std::size_t i, const double* x) {
      double r2 = 0.0;
      for (int a = 0; a < grid.d; ++a) r2 += x[a] * x[a];
      f.values[i] = recipe.amplitude * std::exp(-r2 / w2);
    });
    return f;
  }
  if (recipe.kind == "soliton_scaled") {
    FieldState f = soliton_profile(grid, recipe.factor);
    f.frame = frame;
    return f;
  }
  throw std::invalid_argument("unknown initial profile: " + recipe.kind);
}

SweepReport run_sweep(const SweepConfig& sweep) {
  if (sweep.n_paths < 1)
    throw std::invalid_argument("run_sweep: n_paths must be >= 1");
  SweepReport report;
  report.config = sweep;
  report.config_hash = sweep_config_hash(sweep);
  report.version = kVersion;
  const int workers = sweep.workers > 0 ? sweep.workers : default_workers();

  for (std::size_t si = 0; si < sweep.c_norm_list.size(); ++si) {
    const double s = sweep.c_norm_list[si];
    const NoiseModel model = build_noise_model(
        {Complex{s, 0.0}}, sweep.alpha, sweep.lambda_sign, sweep.grid.d);
    StrengthResult res;
    res.c_norm = s;
    res.trajectories.assign(sweep.n_paths, TrajectorySummary{});

    const FieldState initial =
        make_initial(sweep.initial, sweep.grid, Frame::physical);
    SolverConfig config;
    config.grid = sweep.grid;
    config.model = model;
    config.dt = sweep.dt;
    config.t_end = sweep.t_end;
    config.frame = Frame::physical;
    config.record_stride = sweep.record_stride;
    config.thresholds = sweep.thresholds;

    parallel_for(static_cast<std::size_t>(sweep.n_paths), workers,
                 [&](std::size_t i) {
                   auto& out = res.trajectories[i];
                   out.seed = sweep.base_seed ^
                              (static_cast<std::uint64_t>(si) << 32) ^
                              (0x9e3779b97f4a7c15ULL * (i + 1));
                   try {
                     const BrownianPath path = sample_path(
                         model, 0.5 * sweep.dt, sweep.t_end, out.seed);
                     const TrajectoryRecord traj =
                         integrate(config, path, initial);
                     out.outcome = traj.outcome.kind;
                     out.blowup_time = traj.outcome.blowup_time;
                     out.final_residual_relative =
                         traj.outcome.final_residual_relative;
                     out.peak_grad = traj.outcome.peak_grad;
                     out.strict_scattering = traj.outcome.strict_scattering;
                   } catch (const std::exception& e) {
                     out.error = e.what();
                     out.outcome = OutcomeKind::Undecided;
                   }
                 });

    double grad_sum = 0.0;
    for (const auto& t : res.trajectories) {
      switch (t.outcome) {
        case OutcomeKind::GlobalScattering: ++res.n_scattering; break;
        case OutcomeKind::Blowup: ++res.n_blowup; break;
        default: ++res.n_undecided; break;
      }
      grad_sum += t.peak_grad;
    }
    res.mean_peak_grad = grad_sum / sweep.n_paths;
    res.p_scattering.method = "monte-carlo";
    res.p_scattering.n_samples = sweep.n_paths;
    res.p_scattering.p_hat =
        static_cast<double>(res.n_scattering) / sweep.n_paths;
    res.p_scattering.wilson_ci =
        wilson_interval(res.n_scattering, sweep.n_paths);
    res.p_scattering.std_error = std::sqrt(
        std::max(res.p_scattering.p_hat * (1 - res.p_scattering.p_hat), 1e-12) /
        sweep.n_paths);
    report.results.push_back(std::move(res));
  }
  return report;
}

MartingaleAudit martingale_audit(const NoiseModel& model, int n_paths,
                                 const std::vector<double>& t_checkpoints,
                                 std::uint64_t seed, int workers) {
  if (n_paths < 10) throw std::invalid_argument("martingale_audit: n_paths");
  MartingaleAudit audit;
  audit.checkpoints = t_checkpoints;
  const double t_end =
      *std::max_element(t_checkpoints.begin(), t_checkpoints.end());
  const double dt = 0.005;

  const GridSpec grid = make_grid(model.d, 32, 20.0);
  FieldState initial =
      make_initial(InitialRecipe{"gaussian", 1.0, 1.5, 0.0}, grid,
                   Frame::physical);

  SolverConfig config;
  config.grid = grid;
  config.model = model;
  config.dt = dt;
  config.t_end = std::ceil(t_end / dt) * dt;
  config.frame = Frame::physical;
  config.record_stride = 1;
  config.thresholds.grad_cap_factor = 1e12;  // audit, not classification
  config.thresholds.amp_cap_factor = 1e12;

  const std::size_t nc = t_checkpoints.size();
  std::vector<std::vector<double>> ratio(nc, std::vector<double>(n_paths));
  std::vector<double> identity_err(n_paths, 0.0);

  if (workers <= 0) workers = default_workers();
  parallel_for(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
    const std::uint64_t path_seed =
        seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    const BrownianPath path =
        sample_path(model, 0.5 * dt, config.t_end, path_seed);
    const TrajectoryRecord traj = integrate(config, path, initial);
    const double mass0 = traj.series.mass.front();
    double max_err = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double t = t_checkpoints[c];
      // nearest recorded time
      std::size_t best = 0;
      for (std::size_t k = 0; k < traj.series.times.size(); ++k)
        if (std::abs(traj.series.times[k] - t) <
            std::abs(traj.series.times[best] - t))
          best = k;
      const double r = traj.series.mass[best] / mass0;
      ratio[c][i] = r;
      const double tt = traj.series.times[best];
      const double expected =
          std::exp(2.0 * (path.M[path.index_of(tt)] -
                          model.c_norm * model.c_norm * tt));
      max_err = std::max(max_err, std::abs(r - expected) / expected);
    }
    identity_err[i] = max_err;
  });

  for (std::size_t c = 0; c < nc; ++c) {
    double mean = 0.0;
    for (double r : ratio[c]) mean += r;
    mean /= n_paths;
    double var = 0.0;
    for (double r : ratio[c]) var += (r - mean) * (r - mean);
    var /= std::max(1, n_paths - 1);
    const double se = std::sqrt(var / n_paths);
    audit.mean_mass_ratio.push_back(mean);
    audit.mean_mass_se.push_back(se);
    if (std::abs(mean - 1.0) > 3.0 * std::max(se, 1e-15) && t_checkpoints[c] > 0)
      audit.mean_within_3se = false;
  }
  audit.max_identity_error.assign(1, *std::max_element(identity_err.begin(),
                                                       identity_err.end()));
  audit.identity_ok = audit.max_identity_error[0] <= 1e-10;

  // The multiplicative increment r2/r1 depends only on the Brownian motion
  // after the first checkpoint, so it is independent of the running level;
  // its sample correlation with r1 should sit inside the 3/sqrt(n) band.
  if (nc >= 2) {
    const auto& r1 = ratio.front();
    const auto& r2 = ratio.back();
    double m1 = 0, m2 = 0;
    for (int i = 0; i < n_paths; ++i) {
      m1 += r1[i];
      m2 += r2[i] / r1[i] - 1.0;
    }
    m1 /= n_paths;
    m2 /= n_paths;
    double c11 = 0, c22 = 0, c12 = 0;
    for (int i = 0; i < n_paths; ++i) {
      const double a = r1[i] - m1;
      const double b = (r2[i] / r1[i] - 1.0) - m2;
      c11 += a * a;
      c22 += b * b;
      c12 += a * b;
    }
    const double corr =
        (c11 > 0 && c22 > 0) ? c12 / std::sqrt(c11 * c22) : 0.0;
    audit.increment_correlation.push_back(corr);
    audit.increments_uncorrelated =
        std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(n_paths));
  }
  return audit;
}

std::vector<EquivalenceRow> equivalence_audit(
    const GridSpec& grid, const NoiseModel& model,
    const FieldState& initial_physical, double t_end,
    const std::vector<double>& dt_ladder, std::uint64_t seed) {
  if (dt_ladder.empty()) throw std::invalid_argument("empty dt ladder");
  const double dt_min = *std::min_element(dt_ladder.begin(), dt_ladder.end());
  const double dt_max = *std::max_element(dt_ladder.begin(), dt_ladder.end());
  // margin: a coarse dt may round its own horizon up by almost a full step
  const BrownianPath path =
      sample_path(model, 0.5 * dt_min, t_end + dt_max, seed);

  std::vector<EquivalenceRow> table;
  for (double dt : dt_ladder) {
    SolverConfig config;
    config.grid = grid;
    config.model = model;
    config.dt = dt;
    config.t_end = std::round(t_end / dt) * dt;
    config.record_stride =
        std::max(1, static_cast<int>(std::llround(0.1 * t_end / dt)));
    config.thresholds.grad_cap_factor = 1e12;
    config.thresholds.amp_cap_factor = 1e12;

    config.frame = Frame::physical;
    const TrajectoryRecord phys = integrate(config, path, initial_physical);

    FieldState initial_rescaled = initial_physical;
    initial_rescaled.frame = Frame::rescaled;  // identical at t = 0
    config.frame = Frame::rescaled;
    const TrajectoryRecord resc = integrate(config, path, initial_rescaled);

    double err = 0.0;
    for (std::size_t k = 0; k < phys.snapshots.size() &&
                            k < resc.snapshots.size();
         ++k) {
      const FieldState& xs = phys.snapshots[k];
      FieldState u_from_x =
          xs.frame == Frame::physical
              ? rescale(xs, path, model, RescaleDirection::to_rescaled)
              : xs;
      const FieldState& u = resc.snapshots[k];
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < u.values.size(); ++i) {
        num += std::norm(u_from_x.values[i] - u.values[i]);
        den += std::norm(u.values[i]);
      }
      if (den > 0) err = std::max(err, std::sqrt(num / den));
    }
    table.push_back({dt, err});
  }
  return table;
}

VirialSeries virial_track(const TrajectoryRecord& traj) {
  VirialSeries out;
  for (const auto& snap : traj.snapshots) {
    out.times.push_back(snap.time);
    out.values.push_back(virial_moment(snap));
    out.max_boundary_fraction =
        std::max(out.max_boundary_fraction, boundary_mass_fraction(snap));
  }
  out.boundary_warning = out.max_boundary_fraction > 1e-6;
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

json to_json(const SweepConfig& c) {
  return json{
      {"grid", {{"d", c.grid.d}, {"n", c.grid.n}, {"L", c.grid.L}}},
      {"dt", c.dt},
      {"t_end", c.t_end},
      {"alpha", c.alpha},
      {"lambda_sign", c.lambda_sign},
      {"initial",
       {{"kind", c.initial.kind},
        {"amplitude", c.initial.amplitude},
        {"width", c.initial.width},
        {"factor", c.initial.factor}}},
      {"c_norm_list", c.c_norm_list},
      {"n_paths", c.n_paths},
      {"base_seed", c.base_seed},
      {"record_stride", c.record_stride},
      {"thresholds",
       {{"grad_cap_factor", c.thresholds.grad_cap_factor},
        {"amp_cap_factor", c.thresholds.amp_cap_factor},
        {"scatter_window", c.thresholds.scatter_window},
        {"scatter_tol", c.thresholds.scatter_tol},
        {"scatter_tol_strict", c.thresholds.scatter_tol_strict}}}};
}

SweepConfig config_from_json(const json& j) {
  SweepConfig c;
  c.grid = make_grid(j["grid"]["d"], j["grid"]["n"], j["grid"]["L"]);
  c.dt = j["dt"];
  c.t_end = j["t_end"];
  c.alpha = j["alpha"];
  c.lambda_sign = j["lambda_sign"];
  c.initial.kind = j["initial"]["kind"];
  c.initial.amplitude = j["initial"]["amplitude"];
  c.initial.width = j["initial"]["width"];
  c.initial.factor = j["initial"]["factor"];
  c.c_norm_list = j["c_norm_list"].get<std::vector<double>>();
  c.n_paths = j["n_paths"];
  c.base_seed = j["base_seed"];
  c.record_stride = j["record_stride"];
  const auto& t = j["thresholds"];
  c.thresholds.grad_cap_factor = t["grad_cap_factor"];
  c.thresholds.amp_cap_factor = t["amp_cap_factor"];
  c.thresholds.scatter_window = t["scatter_window"];
  c.thresholds.scatter_tol = t["scatter_tol"];
  c.thresholds.scatter_tol_strict = t["scatter_tol_strict"];
  return c;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

OutcomeKind outcome_from_name(const std::string& s) {
  if (s == "GlobalScattering") return OutcomeKind::GlobalScattering;
  if (s == "Blowup") return OutcomeKind::Blowup;
  return OutcomeKind::Undecided;
}

}  // namespace

std::string sweep_config_hash(const SweepConfig& config) {
  return fnv1a(to_json(config).dump());
}

void persist_run(const SweepReport& report, const std::string& dir) {
  fs::create_directories(dir);

  json manifest{{"version", report.version},
                {"config", to_json(report.config)},
                {"config_hash", report.config_hash},
                {"n_strengths", report.results.size()}};
  std::ofstream(dir + "/manifest.json") << manifest.dump(2) << "\n";

  std::ofstream csv(dir + "/summary.csv");
  csv << "strength,p_hat,ci_lo,ci_hi,n_scattering,n_blowup,n_undecided\n";
  for (const auto& r : report.results)
    csv << r.c_norm << "," << r.p_scattering.p_hat << ","
        << r.p_scattering.wilson_ci.lo << "," << r.p_scattering.wilson_ci.hi
        << "," << r.n_scattering << "," << r.n_blowup << "," << r.n_undecided
        << "\n";

  std::ofstream jsonl(dir + "/trajectories.jsonl");
  for (const auto& r : report.results)
    for (const auto& t : r.trajectories)
      jsonl << json{{"strength", r.c_norm},
                    {"seed", t.seed},
                    {"outcome", outcome_name(t.outcome)},
                    {"blowup_time", t.blowup_time},
                    {"residual", t.final_residual_relative},
                    {"peak_grad", t.peak_grad},
                    {"strict", t.strict_scattering},
                    {"error", t.error}}
                   .dump()
            << "\n";

  // plot-ready curve
  std::ofstream curve(dir + "/curve.csv");
  curve << "strength,p_hat,ci_lo,ci_hi\n";
  for (const auto& r : report.results)
    curve << r.c_norm << "," << r.p_scattering.p_hat << ","
          << r.p_scattering.wilson_ci.lo << "," << r.p_scattering.wilson_ci.hi
          << "\n";
}

SweepReport load_run(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("corrupt-manifest: missing manifest.json");
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception&) {
    throw std::runtime_error("corrupt-manifest: unparsable manifest.json");
  }

  SweepReport report;
  try {
    report.version = manifest.at("version");
    report.config = config_from_json(manifest.at("config"));
    report.config_hash = manifest.at("config_hash");
  } catch (const json::exception&) {
    throw std::runtime_error("corrupt-manifest: missing or mistyped fields");
  }
  if (report.config_hash != sweep_config_hash(report.config))
    throw std::runtime_error("version-mismatch: config hash does not match");
  if (report.version != kVersion)
    throw std::runtime_error("version-mismatch: produced by " + report.version);

  if (!fs::exists(dir + "/summary.csv"))
    throw std::runtime_error("corrupt-manifest: missing summary.csv");
  std::ifstream jsonl(dir + "/trajectories.jsonl");
  if (!jsonl)
    throw std::runtime_error("corrupt-manifest: missing trajectories.jsonl");

  std::map<double, std::size_t> index;
  std::string line;
  try {
  while (std::getline(jsonl, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const double s = j.at("strength");
    if (!index.count(s)) {
      index[s] = report.results.size();
      StrengthResult r;
      r.c_norm = s;
      report.results.push_back(r);
    }
    auto& r = report.results[index[s]];
    TrajectorySummary t;
    t.seed = j.at("seed");
    t.outcome = outcome_from_name(j.at("outcome"));
    t.blowup_time = j.at("blowup_time");
    t.final_residual_relative = j.at("residual");
    t.peak_grad = j.at("peak_grad");
    t.strict_scattering = j.at("strict");
    t.error = j.at("error");
    r.trajectories.push_back(t);
  }
  } catch (const json::exception&) {
    throw std::runtime_error("corrupt-manifest: bad trajectories.jsonl");
  }
  const std::size_t expected = manifest.at("n_strengths");
  if (report.results.size() != expected)
    throw std::runtime_error("corrupt-manifest: strength count mismatch");

  for (auto& r : report.results) {
    double grad_sum = 0.0;
    for (const auto& t : r.trajectories) {
      switch (t.outcome) {
        case OutcomeKind::GlobalScattering: ++r.n_scattering; break;
        case OutcomeKind::Blowup: ++r.n_blowup; break;
        default: ++r.n_undecided; break;
      }
      grad_sum += t.peak_grad;
    }
    const int n = static_cast<int>(r.trajectories.size());
    r.mean_peak_grad = n ? grad_sum / n : 0.0;
    r.p_scattering.method = "monte-carlo";
    r.p_scattering.n_samples = n;
    r.p_scattering.p_hat = n ? static_cast<double>(r.n_scattering) / n : 0.0;
    r.p_scattering.wilson_ci = wilson_interval(r.n_scattering, n);
  }
  return report;
}

SweepConfig parse_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  SweepConfig c;
  std::set<std::string> seen;
  auto get = [&](const std::string& key, auto deflt) {
    using T = decltype(deflt);
    seen.insert(key);
    auto it = kv.find(key);
    if (it == kv.end()) return deflt;
    if constexpr (std::is_same_v<T, std::string>) return it->second;
    else if constexpr (std::is_same_v<T, int>) return std::stoi(it->second);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      return static_cast<std::uint64_t>(std::stoull(it->second));
    else return std::stod(it->second);
  };
  c.grid = make_grid(get("d", 1), get("n", 256), get("L", 40.0));
  c.dt = get("dt", 1e-3);
  c.t_end = get("t_end", 10.0);
  c.alpha = get("alpha", 1.0 + 4.0 / c.grid.d);
  c.lambda_sign = get("lambda", -1);
  c.initial.kind = get("initial.kind", std::string("soliton_scaled"));
  c.initial.amplitude = get("initial.amplitude", 1.0);
  c.initial.width = get("initial.width", 1.0);
  c.initial.factor = get("initial.factor", 1.1);
  c.n_paths = get("n_paths", 100);
  c.base_seed = get("base_seed", std::uint64_t{1});
  c.record_stride = get("record_stride", 500);
  c.workers = get("workers", 0);
  c.thresholds.grad_cap_factor = get("grad_cap_factor", 1e3);
  c.thresholds.amp_cap_factor = get("amp_cap_factor", 1e3);
  c.thresholds.scatter_window = get("scatter_window", 1.0);
  c.thresholds.scatter_tol = get("scatter_tol", 1e-2);
  c.thresholds.scatter_tol_strict = get("scatter_tol_strict", 1e-3);
  if (kv.count("strengths")) {
    c.c_norm_list.clear();
    std::istringstream ss(kv["strengths"]);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.c_norm_list.push_back(std::stod(tok));
  }
  seen.insert("strengths");
  for (const auto& [key, value] : kv)
    if (!seen.count(key))
      throw std::runtime_error("unknown config key: " + key);
  return c;
}

}  // namespace snls
