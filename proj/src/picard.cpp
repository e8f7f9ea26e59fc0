#include "snls/picard.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "snls/fft.hpp"
#include "snls/parallel.hpp"

namespace snls {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::energy_small_time: return "energy-small-time";
    case Regime::energy_large_time: return "energy-large-time";
    case Regime::mass_small_time: return "mass-small-time";
    default: return "mass-large-time";
  }
}

double PicardBudget::ball_radius() const {
  switch (regime) {
    case Regime::energy_small_time: return 2.0 * delta;
    case Regime::energy_large_time: return 2.0 * C_est * E;
    case Regime::mass_small_time: return 2.0 * delta;
    default: return (2.0 * C_est + 1.0) * M;
  }
}

bool PicardBudget::ball_uses_gradient() const {
  return regime == Regime::energy_small_time ||
         regime == Regime::energy_large_time;
}

PicardBudget solve_budget(Regime regime, double value, double C_est, int d) {
  if (!(value > 0.0) || !(C_est > 0.0))
    throw std::invalid_argument("solve_budget: inputs must be positive");
  PicardBudget b;
  b.regime = regime;
  b.d = d;
  b.C_est = C_est;
  switch (regime) {
    case Regime::energy_small_time: {
      if (d < 3) throw std::invalid_argument("energy regime needs d >= 3");
      b.A = value;
      const double k = 4.0 / (d - 2.0);
      b.delta = 0.5 * std::pow(4.0 * C_est * value, -1.0 / k);
      b.lhs = 4.0 * C_est * value * std::pow(2.0 * b.delta, k);
      break;
    }
    case Regime::energy_large_time: {
      if (d < 3) throw std::invalid_argument("energy regime needs d >= 3");
      if (!(value > 1.0))
        throw std::invalid_argument("energy large-time regime needs E > 1");
      b.E = value;
      const double k = 4.0 / (d - 2.0);
      b.epsilon = 1.0 / (4.0 * C_est * std::pow(2.0 * C_est * value, k));
      b.lhs = 4.0 * C_est * b.epsilon * std::pow(2.0 * C_est * value, k);
      break;
    }
    case Regime::mass_small_time: {
      b.A = value;
      const double k = 4.0 / d;
      b.delta = std::pow(std::pow(2.0, 2.0 + k) * C_est * value, -1.0 / k);
      b.lhs = std::pow(2.0, 2.0 + k) * C_est * value * std::pow(b.delta, k);
      break;
    }
    case Regime::mass_large_time: {
      b.M = value;
      const double k = 4.0 / d;
      b.epsilon = 1.0 / (std::pow(2.0 * C_est + 1.0, 1.0 + k) * 2.0 * C_est *
                         std::pow(value, k));
      b.lhs = std::pow(2.0 * C_est + 1.0, 1.0 + k) * 2.0 * C_est * b.epsilon *
              std::pow(value, k);
      break;
    }
  }
  b.satisfied = b.lhs <= 1.0 + 1e-9;
  return b;
}

FieldState nonlinearity(const FieldState& f, double alpha) {
  FieldState out = f;
  const double expo = alpha - 1.0;
  for (auto& v : out.values) v *= std::pow(std::abs(v), expo);
  return out;
}

FieldSeries duhamel_map(const PicardProblem& prob, const FieldSeries& u) {
  const TimeMesh& mesh = prob.mesh;
  if (static_cast<int>(u.size()) != mesh.n_t + 1)
    throw std::invalid_argument("duhamel_map: mesh mismatch");
  const double dt = mesh.dt();
  const double alpha = prob.model.alpha;
  const Complex ilambda{0.0, static_cast<double>(prob.model.lambda_sign)};

  FieldSeries out;
  out.reserve(u.size());
  FieldState lin = prob.initial;  // e^{i(t_j - t0) Lap} u0
  lin.time = mesh.t0;
  out.push_back(lin);

  // Running Duhamel integral I_j = int_{t0}^{t_j} e^{i(t_j-s)Lap} N(s) ds,
  // trapezoid: I_j = e^{i dt Lap}(I_{j-1} + dt/2 N_{j-1}) + dt/2 N_j.
  FieldState integral = make_field(prob.initial.grid, prob.initial.frame,
                                   mesh.t0);
  FieldState n_prev = nonlinearity(u[0], alpha);
  const double h_prev0 = prob.h(mesh.time(0));
  for (auto& v : n_prev.values) v *= h_prev0;

  for (int j = 1; j <= mesh.n_t; ++j) {
    for (std::size_t i = 0; i < integral.values.size(); ++i)
      integral.values[i] += 0.5 * dt * n_prev.values[i];
    integral = free_propagate(integral, dt);
    FieldState n_cur = nonlinearity(u[j], alpha);
    const double h_cur = prob.h(mesh.time(j));
    for (std::size_t i = 0; i < n_cur.values.size(); ++i) {
      n_cur.values[i] *= h_cur;
      integral.values[i] += 0.5 * dt * n_cur.values[i];
    }
    n_prev = std::move(n_cur);
    lin = free_propagate(lin, dt);
    FieldState val = lin;
    for (std::size_t i = 0; i < val.values.size(); ++i)
      val.values[i] -= ilambda * integral.values[i];
    val.time = mesh.time(j);
    out.push_back(std::move(val));
    // The half-weight of N_j stays in the integral: the next pass adds the
    // other half, upgrading t_j to an interior trapezoid node.
  }
  return out;
}

double series_s_norm(const FieldSeries& u, const TimeMesh& mesh, double q,
                     double p, int derivative_order) {
  StrichartzSpec spec{q, p, derivative_order, mesh.t0, mesh.t1};
  return spacetime_norm(mesh.times(), u, spec);
}

double series_s_distance(const FieldSeries& a, const FieldSeries& b,
                         const TimeMesh& mesh, double q, double p) {
  if (a.size() != b.size())
    throw std::invalid_argument("series_s_distance: size mismatch");
  FieldSeries diff = a;
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t i = 0; i < a[j].values.size(); ++i)
      diff[j].values[i] -= b[j].values[i];
  return series_s_norm(diff, mesh, q, p, 0);
}

FieldState random_bandlimited_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FieldState f = make_field(grid);
  const double k_cut = 2.0 * M_PI / grid.L * (grid.n / 8.0);
  for_each_mode(grid, [&](std::size_t i, const double* xi) {
    double k2 = 0.0;
    bool inside = true;
    for (int a = 0; a < grid.d; ++a) {
      k2 += xi[a] * xi[a];
      if (std::abs(xi[a]) > k_cut) inside = false;
    }
    const double re = gauss(rng);
    const double im = gauss(rng);  // draw unconditionally: order is fixed
    if (inside)
      f.values[i] = Complex{re, im} * std::exp(-k2 / (k_cut * k_cut));
  });
  fft::inverse(grid, f.values);
  return f;
}

namespace {

std::pair<double, double> regime_pair(const PicardBudget& budget) {
  return budget.ball_uses_gradient() ? energy_admissible_pair(budget.d)
                                     : mass_admissible_pair(budget.d);
}

FieldSeries scaled_free_series(const PicardProblem& prob,
                               const PicardBudget& budget, double target_norm,
                               std::uint64_t seed) {
  const auto [q, p] = regime_pair(budget);
  FieldState g = random_bandlimited_field(prob.initial.grid, seed);
  g.frame = prob.initial.frame;
  g.time = prob.mesh.t0;
  FieldSeries series;
  series.reserve(prob.mesh.n_t + 1);
  series.push_back(g);
  for (int j = 1; j <= prob.mesh.n_t; ++j) {
    series.push_back(free_propagate(series.back(), prob.mesh.dt()));
    series.back().time = prob.mesh.time(j);
  }
  const double norm = series_s_norm(series, prob.mesh, q, p,
                                    budget.ball_uses_gradient() ? 1 : 0);
  const double scale = norm > 0 ? target_norm / norm : 0.0;
  for (auto& f : series)
    for (auto& v : f.values) v *= scale;
  return series;
}

}  // namespace

std::pair<FieldSeries, ContractionReport> picard_solve(
    const PicardProblem& prob, const PicardBudget& budget, int max_iter,
    double tol, int n_pairs, std::uint64_t seed) {
  const auto [q, p] = regime_pair(budget);
  const int ball_deriv = budget.ball_uses_gradient() ? 1 : 0;
  const double radius = budget.ball_radius();

  ContractionReport report;
  report.budget_satisfied = budget.satisfied;
  report.ball_radius = radius;

  // u^0: free evolution of the anchor.
  FieldSeries u;
  u.reserve(prob.mesh.n_t + 1);
  FieldState cur = prob.initial;
  cur.time = prob.mesh.t0;
  u.push_back(cur);
  for (int j = 1; j <= prob.mesh.n_t; ++j) {
    cur = free_propagate(cur, prob.mesh.dt());
    cur.time = prob.mesh.time(j);
    u.push_back(cur);
  }

  int growing = 0;
  for (int it = 0; it < max_iter; ++it) {
    FieldSeries next;
    try {
      next = duhamel_map(prob, u);
    } catch (const std::invalid_argument&) {
      // the nonlinearity overflowed mid-map: the iteration left every ball
      report.diverged = true;
      throw std::runtime_error("picard_solve: divergence");
    }
    const double dist = series_s_distance(next, u, prob.mesh, q, p);
    if (!std::isfinite(dist) || !next.back().finite()) {
      report.diverged = true;
      throw std::runtime_error("picard_solve: divergence");
    }
    report.iterate_distances.push_back(dist);
    const double ball_norm = series_s_norm(next, prob.mesh, q, p, ball_deriv);
    if (ball_norm > radius * (1.0 + 1e-6)) report.stayed_in_ball = false;
    u = std::move(next);
    report.iterations = it + 1;
    if (report.iterate_distances.size() >= 2 &&
        dist > report.iterate_distances[report.iterate_distances.size() - 2]) {
      if (++growing >= 3) {
        report.diverged = true;
        throw std::runtime_error("picard_solve: divergence");
      }
    } else {
      growing = 0;
    }
    if (dist < tol) break;
  }

  // Empirical Lipschitz over random in-ball pairs.
  report.pair_seeds.resize(n_pairs);
  report.pair_ratios.assign(n_pairs, 0.0);
  parallel_for(static_cast<std::size_t>(n_pairs), default_workers(),
               [&](std::size_t i) {
                 std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
                 std::uniform_real_distribution<double> unif(0.3, 1.0);
                 const std::uint64_t s1 = rng();
                 const std::uint64_t s2 = rng();
                 report.pair_seeds[i] = s1;
                 FieldSeries a =
                     scaled_free_series(prob, budget, radius * unif(rng), s1);
                 FieldSeries b =
                     scaled_free_series(prob, budget, radius * unif(rng), s2);
                 const double denom = series_s_distance(a, b, prob.mesh, q, p);
                 if (denom <= 0) return;
                 FieldSeries fa = duhamel_map(prob, a);
                 FieldSeries fb = duhamel_map(prob, b);
                 report.pair_ratios[i] =
                     series_s_distance(fa, fb, prob.mesh, q, p) / denom;
               });
  report.empirical_lipschitz =
      *std::max_element(report.pair_ratios.begin(), report.pair_ratios.end());
  return {u, report};
}

namespace {

double dual_exponent(double x) { return x / (x - 1.0); }

// |grad f| as a real-valued field.
FieldState gradient_magnitude(const FieldState& f) {
  FieldState out = make_field(f.grid, f.frame, f.time);
  std::vector<double> acc(f.grid.total(), 0.0);
  for (int a = 0; a < f.grid.d; ++a) {
    FieldState da = f;
    fft::forward(da.grid, da.values);
    for_each_mode(da.grid, [&](std::size_t i, const double* xi) {
      da.values[i] *= Complex{0.0, xi[a]};
    });
    fft::inverse(da.grid, da.values);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(da.values[i]);
  }
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.values[i] = std::sqrt(acc[i]);
  return out;
}

FieldSeries apply_each(const FieldSeries& u,
                       FieldState (*fn)(const FieldState&)) {
  FieldSeries out;
  out.reserve(u.size());
  for (const auto& f : u) out.push_back(fn(f));
  return out;
}

}  // namespace

NonlinearityProbeReport probe_nonlinearity_estimates(int d, double alpha,
                                                     int n_samples,
                                                     std::uint64_t seed,
                                                     int n_grid) {
  if (n_samples < 100)
    throw std::invalid_argument("probe: n_samples must be >= 100");
  NonlinearityProbeReport rep;
  rep.n_samples = n_samples;
  const double kappa = alpha - 1.0;

  // Pointwise difference estimate over random complex pairs.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  auto fval = [&](Complex z) { return std::pow(std::abs(z), kappa) * z; };
  double max_all = 0.0, max_half = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double ru = std::exp(gauss(rng));
    const double rv = std::exp(gauss(rng));
    const Complex u = ru * std::polar(1.0, phase(rng));
    const Complex v = rv * std::polar(1.0, phase(rng));
    const double dn = std::abs(u - v);
    if (dn < 1e-12) continue;
    const double ratio =
        std::abs(fval(u) - fval(v)) /
        ((std::pow(ru, kappa) + std::pow(rv, kappa)) * dn);
    max_all = std::max(max_all, ratio);
    if (i < n_samples / 2) max_half = std::max(max_half, ratio);
  }
  rep.pointwise_constant = max_all;
  rep.pointwise_constant_half = max_half;

  // Norm estimates on free evolutions of random band-limited data.
  const bool energy = d >= 3 && std::abs(alpha - (1.0 + 4.0 / (d - 2.0))) < 1e-12;
  const int n = n_grid > 0 ? n_grid : (d == 3 ? 16 : (d == 2 ? 32 : 128));
  const GridSpec grid = make_grid(d, n, 20.0);
  const auto [q, p] =
      energy ? energy_admissible_pair(d) : mass_admissible_pair(d);
  const double qd = dual_exponent(q), pd = dual_exponent(p);
  TimeMesh mesh{0.0, 1.0, 24};

  auto free_series = [&](std::uint64_t s) {
    FieldState g = random_bandlimited_field(grid, s);
    FieldSeries out;
    out.push_back(g);
    for (int j = 1; j <= mesh.n_t; ++j) {
      out.push_back(free_propagate(out.back(), mesh.dt()));
      out.back().time = mesh.time(j);
    }
    return out;
  };
  auto s_of = [&](const FieldSeries& u) {
    return series_s_norm(u, mesh, q, p, 0);
  };
  auto n_of = [&](const FieldSeries& u) {
    return series_s_norm(u, mesh, qd, pd, 0);
  };

  const int n_field_samples = 8;
  for (int i = 0; i < n_field_samples; ++i) {
    FieldSeries u = free_series(seed + 101 * i + 1);
    FieldSeries v = free_series(seed + 101 * i + 2);
    FieldSeries fu, fv, dfv;
    for (const auto& f : u) fu.push_back(nonlinearity(f, alpha));
    for (const auto& f : v) fv.push_back(nonlinearity(f, alpha));
    FieldSeries diff = u, fdiff = fu;
    for (std::size_t j = 0; j < u.size(); ++j)
      for (std::size_t k = 0; k < u[j].values.size(); ++k) {
        diff[j].values[k] -= v[j].values[k];
        fdiff[j].values[k] -= fv[j].values[k];
      }
    const double su = s_of(u), sdiff = s_of(diff);
    if (energy) {
      FieldSeries gu = apply_each(u, gradient_magnitude);
      FieldSeries gv = apply_each(v, gradient_magnitude);
      FieldSeries gfu = apply_each(fu, gradient_magnitude);
      const double sgu = s_of(gu), sgv = s_of(gv);
      rep.norm_ratio_f =
          std::max(rep.norm_ratio_f, n_of(fu) / (su * std::pow(sgu, kappa)));
      if (sdiff > 0)
        rep.norm_ratio_diff = std::max(
            rep.norm_ratio_diff,
            n_of(fdiff) /
                ((std::pow(sgu, kappa) + std::pow(sgv, kappa)) * sdiff));
      rep.norm_ratio_grad = std::max(
          rep.norm_ratio_grad, s_of(gfu) > 0 ? n_of(gfu) / std::pow(sgu, 1.0 + kappa)
                                             : 0.0);
    } else {
      const double sv = s_of(v);
      rep.norm_ratio_f =
          std::max(rep.norm_ratio_f, n_of(fu) / std::pow(su, 1.0 + kappa));
      if (sdiff > 0)
        rep.norm_ratio_diff = std::max(
            rep.norm_ratio_diff,
            n_of(fdiff) /
                ((std::pow(su, kappa) + std::pow(sv, kappa)) * sdiff));
    }
  }
  return rep;
}

double estimate_strichartz_constant(int d, double q, double p,
                                    const GridSpec& grid, int n_samples,
                                    double horizon, std::uint64_t seed) {
  if (!is_admissible(q, p, d))
    throw std::invalid_argument("inadmissible pair");
  TimeMesh mesh{0.0, horizon, 48};
  std::vector<double> ratios(n_samples, 0.0);
  parallel_for(static_cast<std::size_t>(n_samples), default_workers(),
               [&](std::size_t i) {
                 FieldState g = random_bandlimited_field(
                     grid, seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
                 const double l2 = lebesgue_norm(g, 2.0);
                 if (l2 <= 0) return;
                 FieldSeries u;
                 u.push_back(g);
                 for (int j = 1; j <= mesh.n_t; ++j) {
                   u.push_back(free_propagate(u.back(), mesh.dt()));
                   u.back().time = mesh.time(j);
                 }
                 ratios[i] = series_s_norm(u, mesh, q, p, 0) / l2;
               });
  return *std::max_element(ratios.begin(), ratios.end());
}

double estimate_inhomogeneous_constant(int d, double q, double p,
                                       const GridSpec& grid, int n_samples,
                                       double horizon, std::uint64_t seed) {
  if (!is_admissible(q, p, d))
    throw std::invalid_argument("inadmissible pair");
  const double qd = dual_exponent(q), pd = dual_exponent(p);
  TimeMesh mesh{0.0, horizon, 48};
  const double dt = mesh.dt();
  std::vector<double> ratios(n_samples, 0.0);
  parallel_for(
      static_cast<std::size_t>(n_samples), default_workers(),
      [&](std::size_t i) {
        // forcing: free evolution of random data (keeps ||g||_N generic)
        FieldState g0 = random_bandlimited_field(
            grid, seed ^ (0xda942042e4dd58b5ULL * (i + 1)));
        FieldSeries g;
        g.push_back(g0);
        for (int j = 1; j <= mesh.n_t; ++j) {
          g.push_back(free_propagate(g.back(), dt));
          g.back().time = mesh.time(j);
        }
        FieldSeries duh;
        FieldState integral = make_field(grid);
        duh.push_back(integral);
        for (int j = 1; j <= mesh.n_t; ++j) {
          for (std::size_t k = 0; k < integral.values.size(); ++k)
            integral.values[k] += 0.5 * dt * g[j - 1].values[k];
          integral = free_propagate(integral, dt);
          for (std::size_t k = 0; k < integral.values.size(); ++k)
            integral.values[k] += 0.5 * dt * g[j].values[k];
          FieldState val = integral;
          val.time = mesh.time(j);
          duh.push_back(val);
          for (std::size_t k = 0; k < integral.values.size(); ++k)
            integral.values[k] -= 0.5 * dt * g[j].values[k];
        }
        const double denom = series_s_norm(g, mesh, qd, pd, 0);
        if (denom <= 0) return;
        ratios[i] = series_s_norm(duh, mesh, q, p, 0) / denom;
      });
  return *std::max_element(ratios.begin(), ratios.end());
}

}  // namespace snls
