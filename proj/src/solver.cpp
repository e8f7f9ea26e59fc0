#include "snls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snls/fft.hpp"

namespace snls {

FieldState nonlinear_phase_step(const FieldState& f, double h_value, double dt,
                                const NoiseModel& model) {
  if (h_value < 0.0)
    throw std::invalid_argument("nonlinear_phase_step: h must be >= 0");
  FieldState out = f;
  if (dt == 0.0 || h_value == 0.0) return out;
  const double coef = -model.lambda_sign * h_value * dt;
  const double expo = model.alpha - 1.0;
  for (auto& v : out.values) {
    const double phase = coef * std::pow(std::abs(v), expo);
    v *= Complex{std::cos(phase), std::sin(phase)};
  }
  return out;
}

FieldState noise_multiplier_step(const FieldState& f, const BrownianPath& path,
                                 const NoiseModel& model, double t_from,
                                 double t_to) {
  const int j0 = path.index_of(t_from);
  const int j1 = path.index_of(t_to);
  const Complex dW = path.W[j1] - path.W[j0];
  const Complex factor = std::exp(dW - model.mu_hat * (t_to - t_from));
  FieldState out = f;
  for (auto& v : out.values) v *= factor;
  return out;
}

namespace {

double max_amp(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

bool all_finite(const std::vector<Complex>& v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

// The physical frame is integrated in a scaled representation X = e^sigma F
// with sigma accumulating the exact noise factor DeltaW - mu_hat*dt per step,
// so the field buffer stays O(1) even when the mass martingale drives
// ||X||_2 outside the range of double. In the rescaled frame sigma stays 0
// and F is u itself.
TrajectoryRecord integrate(const SolverConfig& config, const BrownianPath& path,
                           const FieldState& initial) {
  if (initial.frame != config.frame)
    throw std::invalid_argument("integrate: initial frame mismatch");
  if (!(config.dt > 0.0)) throw std::invalid_argument("integrate: dt <= 0");
  const long long n_steps = std::llround(config.t_end / config.dt);
  if (n_steps < 1 ||
      std::abs(config.t_end - n_steps * config.dt) >
          1e-12 * std::max(1.0, config.t_end))
    throw std::invalid_argument("integrate: t_end must be a multiple of dt");
  if (path.horizon() < config.t_end - 1e-9)
    throw std::invalid_argument("integrate: path horizon too short");
  if (path.beta.size() != config.model.phi.size())
    throw std::invalid_argument("integrate: path sampled for a different model");

  const NoiseModel& model = config.model;
  const bool physical = config.frame == Frame::physical;
  const double dt = config.dt;
  const double alpha1 = model.alpha - 1.0;

  FieldState F = initial;
  Complex sigma{0.0, 0.0};

  TrajectoryRecord traj;
  traj.config = config;
  traj.path = path;

  const double grad0 = gradient_l2_norm(F);
  const double l20 = lebesgue_norm(F, 2.0);
  const double amp0 = max_amp(F.values);
  const double grad_cap =
      config.thresholds.grad_cap_factor * std::max(grad0, l20);
  const double amp_cap = config.thresholds.amp_cap_factor * amp0;

  double peak_grad = grad0;
  bool triggered = false;

  auto record = [&](double t) {
    const double fn2 = lebesgue_norm(F, 2.0);
    const double scale2 = 2.0 * sigma.real();
    traj.series.times.push_back(t);
    traj.series.mass.push_back(std::exp(scale2) * fn2 * fn2);
    const double g = gradient_l2_norm(F);
    traj.series.grad_l2.push_back(g);
    traj.series.amp_max.push_back(max_amp(F.values));
    traj.series.h_value.push_back(physical || model.c_norm > 0
                                      ? eval_gbm(path, model, t)
                                      : 1.0);
    peak_grad = std::max(peak_grad, g);

    // Snapshots carry the physical field when it is representable, the
    // scaled buffer (numerically the rescaled field) otherwise.
    FieldState snap = F;
    snap.time = t;
    if (physical) {
      if (std::abs(sigma.real()) < 300.0) {
        const Complex fac = std::exp(sigma);
        for (auto& v : snap.values) v *= fac;
        snap.frame = Frame::physical;
      } else {
        snap.frame = Frame::rescaled;
      }
    }
    traj.snapshots.push_back(std::move(snap));
    return g <= grad_cap && traj.series.amp_max.back() <= amp_cap;
  };

  record(0.0);

  for (long long j = 0; j < n_steps && !triggered; ++j) {
    const double t = j * dt;
    F = free_propagate(F, 0.5 * dt);
    if (physical) {
      const double h_eff = std::exp(alpha1 * sigma.real());
      F = nonlinear_phase_step(F, h_eff, dt, model);
      if (!model.phi.empty()) {
        const int i0 = path.index_of(t);
        const int i1 = path.index_of(t + dt);
        sigma += (path.W[i1] - path.W[i0]) - model.mu_hat * dt;
      }
    } else {
      const double h = model.c_norm > 0 || !model.phi.empty()
                           ? eval_gbm(path, model, t + 0.5 * dt)
                           : 1.0;
      F = nonlinear_phase_step(F, h, dt, model);
    }
    F = free_propagate(F, 0.5 * dt);
    F.time = (j + 1) * dt;

    if (!all_finite(F.values)) {
      traj.outcome.kind = OutcomeKind::Blowup;
      traj.outcome.blowup_time = F.time;
      traj.outcome.nan_flag = true;
      traj.outcome.peak_grad = peak_grad;
      return traj;
    }
    if (max_amp(F.values) > amp_cap) triggered = true;

    const bool at_record =
        ((j + 1) % config.record_stride == 0) || (j + 1 == n_steps);
    if (at_record || triggered) {
      if (!record(F.time)) triggered = true;
    }
  }

  traj.outcome = classify_outcome(traj, config.thresholds);
  traj.outcome.peak_grad = peak_grad;
  return traj;
}

namespace {

// Locate the snapshot at time t (within mesh tolerance).
const FieldState& snapshot_at(const TrajectoryRecord& traj, double t) {
  for (const auto& s : traj.snapshots)
    if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
  throw std::invalid_argument("missing-snapshot");
}

FieldState as_rescaled(const TrajectoryRecord& traj, const FieldState& s) {
  if (s.frame == Frame::rescaled) return s;
  return rescale(s, traj.path, traj.config.model,
                 RescaleDirection::to_rescaled);
}

}  // namespace

double scattering_residual(const TrajectoryRecord& traj, double t1, double t2) {
  if (t1 > t2) throw std::invalid_argument("scattering_residual: t1 > t2");
  FieldState u1 = as_rescaled(traj, snapshot_at(traj, t1));
  FieldState u2 = as_rescaled(traj, snapshot_at(traj, t2));
  u1 = free_propagate(u1, -t1);
  u2 = free_propagate(u2, -t2);
  FieldState diff = u2;
  for (std::size_t i = 0; i < diff.values.size(); ++i)
    diff.values[i] -= u1.values[i];
  return traj.config.model.s_alpha() == 0 ? lebesgue_norm(diff, 2.0)
                                          : sobolev_h1_norm(diff);
}

Outcome classify_outcome(const TrajectoryRecord& traj,
                         const BlowupThresholds& thresholds) {
  Outcome out;
  const auto& s = traj.series;
  if (s.times.empty()) return out;

  const double grad_cap =
      thresholds.grad_cap_factor *
      std::max(s.grad_l2.front(), std::sqrt(s.mass.front()));
  const double amp_cap = thresholds.amp_cap_factor * s.amp_max.front();
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (!std::isfinite(s.grad_l2[i]) || !std::isfinite(s.amp_max[i])) {
      out.kind = OutcomeKind::Blowup;
      out.blowup_time = s.times[i];
      out.nan_flag = true;
      return out;
    }
    if (s.grad_l2[i] > grad_cap || s.amp_max[i] > amp_cap) {
      out.kind = OutcomeKind::Blowup;
      out.blowup_time = s.times[i];
      return out;
    }
  }

  const double t_end = traj.config.t_end;
  if (s.times.back() < t_end - 1e-9 * std::max(1.0, t_end)) return out;

  // Trailing-window Cauchy residual of e^{-it Lap} u(t).
  const double t2 = traj.snapshots.back().time;
  double t1 = -1.0;
  for (const auto& snap : traj.snapshots)
    if (snap.time <= t2 - thresholds.scatter_window + 1e-9) t1 = snap.time;
  if (t1 < 0.0) {
    // Horizon shorter than the requested window: use the widest span we have.
    for (const auto& snap : traj.snapshots)
      if (snap.time < t2 - 1e-12) {
        t1 = snap.time;
        break;
      }
    if (t1 < 0.0) return out;
  }

  const double res = scattering_residual(traj, t1, t2);
  const FieldState u2 = as_rescaled(traj, traj.snapshots.back());
  const double ref = lebesgue_norm(u2, 2.0);
  out.final_residual = res;
  out.final_residual_relative = ref > 0 ? res / ref : res;
  if (out.final_residual_relative < thresholds.scatter_tol) {
    out.kind = OutcomeKind::GlobalScattering;
    out.strict_scattering =
        out.final_residual_relative < thresholds.scatter_tol_strict;
  }
  return out;
}

FieldState soliton_profile(const GridSpec& grid, double scale) {
  if (grid.d != 1)
    throw std::invalid_argument("soliton_profile: d = 1 only");
  FieldState f = make_field(grid, Frame::rescaled, 0.0);
  const double amp = std::pow(3.0, 0.25);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.coord(i);
    f.values[i] = scale * amp * std::sqrt(1.0 / std::cosh(2.0 * x));
  }
  return f;
}

double soliton_equation_residual(const GridSpec& grid) {
  FieldState q = soliton_profile(grid);
  FieldState qxx = q;
  fft::forward(qxx.grid, qxx.values);
  for_each_mode(qxx.grid, [&](std::size_t i, const double* xi) {
    qxx.values[i] *= -xi[0] * xi[0];
  });
  fft::inverse(qxx.grid, qxx.values);
  double r = 0.0;
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    const double qi = q.values[i].real();
    r = std::max(r, std::abs(qxx.values[i].real() - qi + std::pow(qi, 5)));
  }
  return r;
}

}  // namespace snls
