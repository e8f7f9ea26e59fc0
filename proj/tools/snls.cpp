#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "snls/experiments.hpp"
#include "snls/picard.hpp"

using namespace snls;
using nlohmann::json;

namespace {

// "a+bi" / "a-bi" / "a" / "bi" literals, lists comma-separated.
Complex parse_complex(const std::string& tok) {
  std::string s = tok;
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) throw CLI::ValidationError("empty complex literal");
  double re = 0.0, im = 0.0;
  if (s.back() == 'i' || s.back() == 'I') {
    s.pop_back();
    // split at the last +/- that is not an exponent sign
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
      if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
        split = i;
        break;
      }
    }
    if (split == std::string::npos) {
      im = (s.empty() || s == "+") ? 1.0 : (s == "-" ? -1.0 : std::stod(s));
    } else {
      re = std::stod(s.substr(0, split));
      const std::string imag = s.substr(split);
      im = (imag == "+") ? 1.0 : (imag == "-" ? -1.0 : std::stod(imag));
    }
  } else {
    re = std::stod(s);
  }
  return {re, im};
}

std::vector<Complex> parse_complex_list(const std::string& csv) {
  std::vector<Complex> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_complex(tok));
  return out;
}

int fail(const std::string& param, const std::string& why) {
  std::cerr << "error: validation-failure parameter=" << param << " " << why
            << "\n";
  return 2;
}

// --- selftest -------------------------------------------------------------

int g_checks = 0, g_failures = 0;
void check(const std::string& name, bool ok) {
  ++g_checks;
  if (!ok) ++g_failures;
  std::printf("%-58s %s\n", name.c_str(), ok ? "ok" : "FAIL");
}

template <typename Fn>
bool throws(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception&) {
    return true;
  }
  return false;
}

int run_selftest() {
  // spectral-core
  {
    const GridSpec g = make_grid(1, 8, 2 * M_PI);
    check("make_grid(1,8,2pi) spacing pi/4",
          std::abs(g.spacing() - M_PI / 4) < 1e-15);
    check("make_grid(3,64,40) 64^3 points",
          make_grid(3, 64, 40).total() == 64ull * 64 * 64);
    check("make_grid(2,7,10) invalid-resolution",
          throws([] { make_grid(2, 7, 10); }));

    const GridSpec g1 = make_grid(1, 64, 20.0);
    FieldState f = make_initial({"gaussian", 1.0, 1.0, 0}, g1, Frame::physical);
    const FieldState id = free_propagate(f, 0.0);
    double dmax = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      dmax = std::max(dmax, std::abs(id.values[i] - f.values[i]));
    check("free_propagate dt=0 identity", dmax == 0.0);
    const double n0 = lebesgue_norm(f, 2.0);
    check("free_propagate unitary",
          std::abs(lebesgue_norm(free_propagate(f, 0.37), 2.0) - n0) <
              1e-12 * n0);

    FieldState one = make_field(g1);
    for (auto& v : one.values) v = 1.0;
    check("lebesgue constant sqrt(V)",
          std::abs(lebesgue_norm(one, 2.0) - std::sqrt(20.0)) < 1e-12);
    check("h1 norm of constant equals l2",
          std::abs(sobolev_h1_norm(one) - lebesgue_norm(one, 2.0)) < 1e-12);
    FieldState mode = make_field(g1);
    const double xi = g1.freq(3);
    for (int i = 0; i < g1.n; ++i)
      mode.values[i] = 2.0 * std::polar(1.0, xi * g1.coord(i));
    const double expect = std::sqrt(4.0 * 20.0 * (1 + xi * xi));
    check("h1 norm of single mode",
          std::abs(sobolev_h1_norm(mode) - expect) < 1e-9 * expect);

    check("admissible d=3 energy pair", is_admissible(6.0, 18.0 / 7.0, 3));
    check("admissible d=2 q=p=4", is_admissible(4.0, 4.0, 2));
    check("inadmissible d=2 (2,inf)", !is_admissible(2.0, kInf, 2));

    // time-constant field: T^{1/q} * ||g||_p
    std::vector<FieldState> samp(5, f);
    std::vector<double> times;
    for (int j = 0; j < 5; ++j) {
      times.push_back(0.25 * j);
      samp[j].time = times.back();
    }
    const double st =
        spacetime_norm(times, samp, StrichartzSpec{6, 6, 0, 0.0, 1.0});
    check("spacetime norm separable",
          std::abs(st - lebesgue_norm(f, 6.0)) < 1e-10);
    check("spacetime norm empty interval",
          spacetime_norm(times, samp, StrichartzSpec{6, 6, 0, 0.5, 0.5}) == 0);
  }

  // noise-engine
  {
    const auto mi = build_noise_model({Complex{0, 1}}, 5.0, -1, 1);
    check("phi=i: mu=1/2 mu_hat=0 c=0",
          std::abs(mi.mu - 0.5) < 1e-15 && std::abs(mi.mu_hat) < 1e-15 &&
              mi.c_norm == 0.0);
    const auto m1 = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
    check("phi=1: mu=1/2 mu_hat=1",
          std::abs(m1.mu - 0.5) < 1e-15 && std::abs(m1.mu_hat - 1.0) < 1e-15);
    const auto m11 = build_noise_model({Complex{1, 1}}, 5.0, -1, 1);
    check("phi=1+i: mu=1 mu_hat=1+i c_norm=1",
          std::abs(m11.mu - 1.0) < 1e-15 &&
              std::abs(m11.mu_hat - Complex{1, 1}) < 1e-15 &&
              std::abs(m11.c_norm - 1.0) < 1e-15);

    const auto p1 = sample_path(m11, 0.01, 1.0, 42);
    const auto p2 = sample_path(m11, 0.01, 1.0, 42);
    check("path M(0)=W(0)=0", p1.M[0] == 0.0 && std::abs(p1.W[0]) == 0.0);
    check("equal seeds identical paths", p1.M == p2.M && p1.W == p2.W);
    check("gbm t=0 is 1", eval_gbm(p1, m11, 0.0) == 1.0);
    const auto pc = sample_path(mi, 0.01, 1.0, 7);
    check("gbm with c=0 constant 1", eval_gbm(pc, mi, 0.5) == 1.0);
    double replay = 0;
    for (int j = 0; j <= p1.n_steps; ++j) {
      const double t = p1.time(j);
      replay = std::max(replay,
                        std::abs(eval_gbm(p1, m11, t) -
                                 std::exp((m11.alpha - 1) *
                                          (p1.M[j] - m11.c_norm * m11.c_norm * t))));
    }
    check("gbm definition replay", replay < 1e-12);

    const GridSpec g1 = make_grid(1, 64, 20.0);
    FieldState f = make_initial({"gaussian", 1.0, 1.0, 0}, g1, Frame::physical);
    f.time = 0.0;
    const FieldState at0 =
        rescale(f, p1, m11, RescaleDirection::to_rescaled);
    double dmax = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      dmax = std::max(dmax, std::abs(at0.values[i] - f.values[i]));
    check("rescale at t=0 identity", dmax == 0.0);
    FieldState later = f;
    later.time = 0.5;
    const FieldState rt = rescale(rescale(later, p1, m11,
                                          RescaleDirection::to_rescaled),
                                  p1, m11, RescaleDirection::to_physical);
    dmax = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      dmax = std::max(dmax, std::abs(rt.values[i] - later.values[i]));
    check("rescale round trip 1e-13", dmax < 1e-13);
    FieldState cons = later;
    const FieldState consr = rescale(cons, pc, mi, RescaleDirection::to_rescaled);
    dmax = 0;
    for (std::size_t i = 0; i < cons.values.size(); ++i)
      dmax = std::max(dmax,
                      std::abs(std::abs(consr.values[i]) -
                               std::abs(cons.values[i])));
    check("conservative noise preserves |u|", dmax < 1e-13);

    const auto small_eps =
        decay_exceedance_probability(1.0, 1e-8, 5.0, "closed-form");
    check("exceedance eps->0 tends to 1", small_eps.p_hat > 0.999);
  }

  // snls-solver
  {
    const GridSpec g1 = make_grid(1, 64, 20.0);
    const auto model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
    FieldState f = make_initial({"gaussian", 1.0, 1.0, 0}, g1, Frame::physical);
    const FieldState np0 = nonlinear_phase_step(f, 1.0, 0.0, model);
    double dmax = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      dmax = std::max(dmax, std::abs(np0.values[i] - f.values[i]));
    check("nonlinear phase dt=0 identity", dmax == 0.0);
    const FieldState np = nonlinear_phase_step(f, 2.0, 0.3, model);
    dmax = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      dmax = std::max(dmax,
                      std::abs(std::abs(np.values[i]) - std::abs(f.values[i])));
    check("nonlinear phase preserves |u| 1e-14", dmax < 1e-14);
    FieldState cf = make_field(g1);
    for (auto& v : cf.values) v = 0.7;
    const FieldState cfs = nonlinear_phase_step(cf, 1.5, 0.2, model);
    const Complex expect =
        0.7 * std::exp(Complex{0, 1} * 1.5 * 0.2 * std::pow(0.7, 4.0));
    check("nonlinear phase constant-field ODE",
          std::abs(cfs.values[0] - expect) < 1e-14);

    const auto mi = build_noise_model({Complex{0, 1}}, 5.0, -1, 1);
    const auto pci = sample_path(mi, 0.01, 1.0, 3);
    const FieldState nm =
        noise_multiplier_step(f, pci, mi, 0.0, 0.5);
    check("imaginary phi conserves mass",
          std::abs(lebesgue_norm(nm, 2.0) - lebesgue_norm(f, 2.0)) <
              1e-13 * lebesgue_norm(f, 2.0));
    const auto m11 = build_noise_model({Complex{1, 1}}, 5.0, -1, 1);
    const auto p11 = sample_path(m11, 0.01, 1.0, 3);
    const FieldState nm2 = noise_multiplier_step(f, p11, m11, 0.0, 0.5);
    const double ratio = std::pow(lebesgue_norm(nm2, 2.0), 2) /
                         std::pow(lebesgue_norm(f, 2.0), 2);
    const double expect_ratio =
        std::exp(2 * p11.M[p11.index_of(0.5)] -
                 2 * m11.c_norm * m11.c_norm * 0.5);
    check("mass ratio identity 1e-13",
          std::abs(ratio - expect_ratio) < 1e-13 * expect_ratio);

    SolverConfig cfg;
    cfg.grid = g1;
    cfg.model = build_noise_model({}, 5.0, 1, 1);  // defocusing, no noise
    cfg.dt = 0.01;
    cfg.t_end = 0.5;
    cfg.record_stride = 10;
    const auto path = sample_path(cfg.model, 0.005, 1.0, 5);
    FieldState tiny = make_initial({"gaussian", 1e-8, 1.0, 0}, g1,
                                   Frame::physical);
    const auto traj = integrate(cfg, path, tiny);
    const FieldState ref = free_propagate(tiny, 0.5);
    double err = 0;
    const auto& last = traj.snapshots.back();
    for (std::size_t i = 0; i < ref.values.size(); ++i)
      err += std::norm(last.values[i] - ref.values[i]);
    check("integrate ~ free evolution for tiny data",
          std::sqrt(err) < 1e-10);
    check("scattering residual t1=t2 is 0",
          scattering_residual(traj, 0.5, 0.5) == 0.0);
    check("free run classifies GlobalScattering",
          traj.outcome.kind == OutcomeKind::GlobalScattering);
  }

  // picard-lab
  {
    const auto b = solve_budget(Regime::energy_small_time, 1.0, 1.0, 4);
    check("energy-small d=4 C=1 A=1 delta=1/4",
          std::abs(b.delta - 0.25) < 1e-12 && b.satisfied);
    const auto bm = solve_budget(Regime::mass_small_time, 1.0, 1.0, 2);
    check("mass-small d=2 delta=1/4", std::abs(bm.delta - 0.25) < 1e-12);
    const double halved_lhs =
        4 * 1.0 * 1.0 * std::pow(2 * (b.delta / 2), 4.0 / (4 - 2));
    check("halved delta keeps slack", halved_lhs < 1.0);

    const GridSpec g1 = make_grid(1, 64, 20.0);
    PicardProblem prob;
    prob.initial = make_initial({"gaussian", 0.1, 1.0, 0}, g1, Frame::rescaled);
    prob.h = [](double) { return 0.0; };
    prob.mesh = TimeMesh{0.0, 0.5, 16};
    prob.model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
    FieldSeries zero(prob.mesh.n_t + 1,
                     make_field(g1, Frame::rescaled, 0.0));
    const auto mapped = duhamel_map(prob, zero);
    FieldState freeT = free_propagate(prob.initial, 0.5);
    double err = 0;
    for (std::size_t i = 0; i < freeT.values.size(); ++i)
      err = std::max(err,
                     std::abs(mapped.back().values[i] - freeT.values[i]));
    check("duhamel with h=0 is free evolution", err < 1e-12);

    const FieldState z = nonlinearity(make_field(g1), 5.0);
    check("nonlinearity(0)=0", lebesgue_norm(z, kInf) == 0.0);
    FieldState a = make_field(g1);
    for (auto& v : a.values) v = 2.0;
    check("nonlinearity constant a^5",
          std::abs(nonlinearity(a, 5.0).values[0].real() - 32.0) < 1e-12);
    FieldState av = make_initial({"gaussian", 1.0, 1.0, 0}, g1,
                                 Frame::physical);
    const Complex rot = std::polar(1.0, 0.7);
    FieldState avr = av;
    for (auto& v : avr.values) v *= rot;
    const FieldState fa = nonlinearity(av, 5.0);
    const FieldState far = nonlinearity(avr, 5.0);
    double gerr = 0;
    for (std::size_t i = 0; i < fa.values.size(); ++i)
      gerr = std::max(gerr, std::abs(far.values[i] - rot * fa.values[i]));
    check("nonlinearity gauge covariance 1e-14", gerr < 1e-14);
  }

  // experiments persistence
  {
    SweepConfig sc;
    sc.grid = make_grid(1, 16, 10.0);
    sc.c_norm_list = {0.0};
    sc.n_paths = 2;
    sc.dt = 0.05;
    sc.t_end = 0.2;
    sc.record_stride = 2;
    sc.initial = {"gaussian", 1e-6, 1.0, 0};
    sc.thresholds.scatter_window = 0.1;
    const auto rep = run_sweep(sc);
    const std::string dir = "/tmp/snls_selftest_run";
    std::filesystem::remove_all(dir);
    persist_run(rep, dir);
    const auto loaded = load_run(dir);
    check("persist/load round trip",
          loaded.config_hash == rep.config_hash &&
              loaded.results.size() == rep.results.size() &&
              loaded.results[0].n_scattering == rep.results[0].n_scattering);
    // tamper with the stored config
    {
      std::ifstream mf(dir + "/manifest.json");
      json manifest;
      mf >> manifest;
      manifest["config"]["dt"] = 999.0;
      std::ofstream(dir + "/manifest.json") << manifest.dump(2);
    }
    check("tampered manifest is version-mismatch",
          throws([&] { load_run(dir); }));
    std::filesystem::remove_all(dir);
  }

  std::printf("\nselftest: %d checks, %d failures\n", g_checks, g_failures);
  return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snls-lab: stochastic nonlinear Schrodinger numerical laboratory"};
  app.require_subcommand(1);

  // ---- gbm ----
  auto* gbm = app.add_subcommand(
      "gbm", "Exceedance probability of the geometric Brownian motion sup");
  std::vector<double> gbm_cnorms{1.0};
  std::vector<double> gbm_eps{1.0};
  std::string gbm_method = "closed-form";
  double gbm_alpha = 5.0;
  long long gbm_nsamples = 100000;
  std::uint64_t gbm_seed = 1;
  gbm->add_option("--c-norm", gbm_cnorms, "noise strengths ||c|| (> 0)");
  gbm->add_option("--epsilon", gbm_eps, "exceedance levels (> 0)");
  gbm->add_option("--method", gbm_method,
                  "closed-form | monte-carlo | both (default closed-form)");
  gbm->add_option("--alpha", gbm_alpha, "nonlinearity exponent (default 5)");
  gbm->add_option("--n-samples", gbm_nsamples, "Monte Carlo sample count");
  gbm->add_option("--seed", gbm_seed, "base RNG seed");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Integrate one trajectory");
  int sim_d = 1, sim_n = 256, sim_lambda = -1, sim_stride = 100;
  double sim_L = 40.0, sim_dt = 1e-3, sim_tend = 1.0, sim_alpha = 0.0;
  std::string sim_frame = "physical", sim_phi = "1", sim_out,
              sim_profile = "gaussian";
  double sim_amplitude = 1.0, sim_width = 1.0, sim_factor = 1.1;
  std::uint64_t sim_seed = 1;
  bool sim_snapshots = false;
  sim->add_option("--d", sim_d, "dimension (1-3)");
  sim->add_option("--n", sim_n, "grid points per axis (power of two >= 8)");
  sim->add_option("--L", sim_L, "box side length");
  sim->add_option("--dt", sim_dt, "time step (> 0)");
  sim->add_option("--t-end", sim_tend, "horizon (multiple of dt)");
  sim->add_option("--frame", sim_frame, "physical | rescaled");
  sim->add_option("--phi", sim_phi, "noise coefficients, e.g. \"1,0.5+0.5i\"");
  sim->add_option("--alpha", sim_alpha,
                  "exponent; 0 = mass-critical 1+4/d (default)");
  sim->add_option("--lambda", sim_lambda, "nonlinearity sign (+1 or -1)");
  sim->add_option("--seed", sim_seed, "path seed");
  sim->add_option("--stride", sim_stride, "snapshot stride in steps");
  sim->add_option("--initial", sim_profile, "gaussian | soliton_scaled");
  sim->add_option("--amplitude", sim_amplitude, "gaussian amplitude");
  sim->add_option("--width", sim_width, "gaussian width");
  sim->add_option("--factor", sim_factor, "soliton scale factor");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_flag("--snapshots", sim_snapshots, "write field snapshot files");

  // ---- sweep ----
  auto* sw = app.add_subcommand("sweep",
                                "Monte Carlo probability-vs-strength study");
  std::string sw_config, sw_out = "sweep_out";
  sw->add_option("--config", sw_config, "key = value config file")->required();
  sw->add_option("--out", sw_out, "output directory");

  // ---- picard ----
  auto* pc = app.add_subcommand("picard", "Fixed-point construction report");
  std::string pc_regime = "mass-small-time";
  double pc_value = 1.0, pc_cest = 0.0, pc_t1 = 0.5, pc_amp = 0.05;
  int pc_d = 1, pc_n = 256, pc_nt = 64, pc_maxiter = 25;
  double pc_L = 40.0;
  std::uint64_t pc_seed = 7;
  pc->add_option("--regime", pc_regime,
                 "energy-small-time | energy-large-time | mass-small-time | "
                 "mass-large-time");
  pc->add_option("--value", pc_value, "A (small-time), E or M (large-time)");
  pc->add_option("--c-est", pc_cest, "generic constant; 0 = estimate");
  pc->add_option("--d", pc_d, "dimension");
  pc->add_option("--n", pc_n, "grid points per axis");
  pc->add_option("--L", pc_L, "box side length");
  pc->add_option("--t1", pc_t1, "interval end (start 0)");
  pc->add_option("--nt", pc_nt, "time mesh intervals");
  pc->add_option("--amplitude", pc_amp, "initial gaussian amplitude");
  pc->add_option("--max-iter", pc_maxiter, "picard iteration cap");
  pc->add_option("--seed", pc_seed, "probe seed");

  auto* st = app.add_subcommand("selftest", "Run the built-in example suite");
  (void)st;

  CLI11_PARSE(app, argc, argv);

  try {
    if (gbm->parsed()) {
      for (double c : gbm_cnorms)
        if (!(c > 0)) return fail("c-norm", "must be > 0");
      for (double e : gbm_eps)
        if (!(e > 0)) return fail("epsilon", "must be > 0");
      std::cout << "c_norm,epsilon,method,p_hat,ci_lo,ci_hi,n_samples,seed\n";
      for (double c : gbm_cnorms)
        for (double e : gbm_eps) {
          std::vector<std::string> methods;
          if (gbm_method == "both")
            methods = {"closed-form", "monte-carlo"};
          else
            methods = {gbm_method};
          for (const auto& m : methods) {
            const auto est = decay_exceedance_probability(
                c, e, gbm_alpha, m, gbm_nsamples, gbm_seed);
            std::cout << c << "," << e << "," << m << "," << est.p_hat << ","
                      << est.wilson_ci.lo << "," << est.wilson_ci.hi << ","
                      << est.n_samples << "," << gbm_seed << "\n";
          }
        }
      return 0;
    }

    if (sim->parsed()) {
      if (!(sim_dt > 0)) return fail("dt", "must be > 0");
      if (!(sim_tend >= sim_dt)) return fail("t-end", "must be >= dt");
      if (sim_stride < 1) return fail("stride", "must be >= 1");
      GridSpec grid;
      try {
        grid = make_grid(sim_d, sim_n, sim_L);
      } catch (const std::exception& e) {
        return fail("n/d/L", e.what());
      }
      if (sim_alpha == 0.0) sim_alpha = 1.0 + 4.0 / sim_d;
      const auto model = build_noise_model(parse_complex_list(sim_phi),
                                           sim_alpha, sim_lambda, sim_d);
      const Frame frame =
          sim_frame == "rescaled" ? Frame::rescaled : Frame::physical;
      SolverConfig cfg;
      cfg.grid = grid;
      cfg.model = model;
      cfg.dt = sim_dt;
      cfg.t_end = sim_tend;
      cfg.frame = frame;
      cfg.record_stride = sim_stride;
      const auto path =
          sample_path(model, 0.5 * sim_dt, sim_tend + sim_dt, sim_seed);
      const FieldState initial = make_initial(
          {sim_profile, sim_amplitude, sim_width, sim_factor}, grid, frame);
      const auto traj = integrate(cfg, path, initial);

      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!sim_out.empty()) {
        std::filesystem::create_directories(sim_out);
        file.open(sim_out + "/events.jsonl");
        os = &file;
      }
      for (std::size_t k = 0; k < traj.series.times.size(); ++k)
        *os << json{{"time", traj.series.times[k]},
                    {"mass", traj.series.mass[k]},
                    {"grad_l2", traj.series.grad_l2[k]},
                    {"amp_max", traj.series.amp_max[k]},
                    {"h_c", traj.series.h_value[k]}}
                   .dump()
            << "\n";
      *os << json{{"outcome", outcome_name(traj.outcome.kind)},
                  {"blowup_time", traj.outcome.blowup_time},
                  {"residual", traj.outcome.final_residual_relative},
                  {"peak_grad", traj.outcome.peak_grad}}
                 .dump()
          << "\n";
      if (!sim_out.empty() && sim_snapshots) {
        int idx = 0;
        for (const auto& snap : traj.snapshots)
          write_snapshot(snap,
                         sim_out + "/snapshot_" + std::to_string(idx++) + ".snls");
      }
      return 0;
    }

    if (sw->parsed()) {
      const SweepConfig cfg = parse_sweep_config(sw_config);
      const auto report = run_sweep(cfg);
      persist_run(report, sw_out);
      for (const auto& r : report.results)
        std::cout << "strength " << r.c_norm << ": p_hat "
                  << r.p_scattering.p_hat << " [" << r.p_scattering.wilson_ci.lo
                  << ", " << r.p_scattering.wilson_ci.hi << "] blowup "
                  << r.n_blowup << " undecided " << r.n_undecided << "\n";
      return 0;
    }

    if (pc->parsed()) {
      Regime regime;
      if (pc_regime == "energy-small-time") regime = Regime::energy_small_time;
      else if (pc_regime == "energy-large-time") regime = Regime::energy_large_time;
      else if (pc_regime == "mass-small-time") regime = Regime::mass_small_time;
      else if (pc_regime == "mass-large-time") regime = Regime::mass_large_time;
      else return fail("regime", "unknown regime " + pc_regime);

      GridSpec grid = make_grid(pc_d, pc_n, pc_L);
      const bool energy = regime == Regime::energy_small_time ||
                          regime == Regime::energy_large_time;
      const double alpha =
          energy ? 1.0 + 4.0 / (pc_d - 2) : 1.0 + 4.0 / pc_d;
      const auto [q, p] =
          energy ? energy_admissible_pair(pc_d) : mass_admissible_pair(pc_d);
      if (pc_cest <= 0) {
        const double hom = estimate_strichartz_constant(pc_d, q, p, grid, 8,
                                                        pc_t1, pc_seed);
        const double inhom = estimate_inhomogeneous_constant(pc_d, q, p, grid,
                                                             8, pc_t1, pc_seed);
        const auto probe = probe_nonlinearity_estimates(pc_d, alpha, 1000,
                                                        pc_seed);
        pc_cest = std::max(hom, inhom * probe.pointwise_constant);
      }
      const PicardBudget budget = solve_budget(regime, pc_value, pc_cest, pc_d);

      PicardProblem prob;
      prob.mesh = TimeMesh{0.0, pc_t1, pc_nt};
      prob.model = build_noise_model({Complex{1, 0}}, alpha, -1, pc_d);
      prob.initial =
          make_initial({"gaussian", pc_amp, 1.0, 0}, grid, Frame::rescaled);
      const double hconst = energy || regime == Regime::mass_small_time
                                ? std::min(pc_value, budget.epsilon > 0
                                                         ? budget.epsilon
                                                         : pc_value)
                                : budget.epsilon;
      prob.h = [hconst](double) { return hconst; };

      const auto [fixed, report] =
          picard_solve(prob, budget, pc_maxiter, 1e-10, 20, pc_seed);
      json out{{"regime", regime_name(regime)},
               {"C_est", pc_cest},
               {"delta", budget.delta},
               {"epsilon", budget.epsilon},
               {"satisfied", budget.satisfied},
               {"ball_radius", report.ball_radius},
               {"stayed_in_ball", report.stayed_in_ball},
               {"iterate_distances", report.iterate_distances},
               {"empirical_lipschitz", report.empirical_lipschitz},
               {"pair_ratios", report.pair_ratios},
               {"iterations", report.iterations}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (st->parsed()) return run_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
