#pragma once

#include <cstdint>
#include <vector>

#include "snls/grid.hpp"
#include "snls/stats.hpp"

namespace snls {

enum class Criticality { mass, energy };

// Noise coefficients phi_k together with the derived scalar quantities that
// drive the dynamics: mu = (1/2) sum |phi_k|^2, mu_hat = (1/2) sum
// (|phi_k|^2 + phi_k^2), c_k = Re phi_k, and the nonlinearity data.
struct NoiseModel {
  std::vector<Complex> phi;
  double alpha = 5.0;
  int lambda_sign = -1;  // coefficient of the nonlinearity, raw sign
  int d = 1;
  Criticality criticality = Criticality::mass;

  double mu = 0.0;
  Complex mu_hat{0.0, 0.0};
  std::vector<double> c;
  double c_norm = 0.0;

  int s_alpha() const { return criticality == Criticality::mass ? 0 : 1; }
};

// Validates that alpha matches 1+4/d (mass) or 1+4/(d-2) (energy, d >= 3)
// and computes the derived quantities. Throws on exponent-dimension mismatch.
NoiseModel build_noise_model(const std::vector<Complex>& phi, double alpha,
                             int lambda_sign, int d);

// Discretized driving paths on a uniform mesh t_j = j*dt, j = 0..n_steps:
// per-mode Brownian motions beta_k and the aggregates M = sum c_k beta_k,
// W = sum phi_k beta_k.
struct BrownianPath {
  double dt = 0.0;
  int n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> beta;  // [mode][time index]
  std::vector<double> M;                  // [time index]
  std::vector<Complex> W;                 // [time index]

  double horizon() const { return dt * n_steps; }
  double time(int j) const { return dt * j; }
  // Mesh index of t; throws "t-off-mesh" if t is not a mesh point.
  int index_of(double t) const;
};

BrownianPath sample_path(const NoiseModel& model, double dt, double horizon,
                         std::uint64_t seed);

// Geometric Brownian motion h_c(t) = exp((alpha-1)(M(t) - ||c||^2 t)).
double eval_gbm(const BrownianPath& path, const NoiseModel& model, double t);

enum class RescaleDirection { to_rescaled, to_physical };

// Doss-Sussmann transform u = e^{mu_hat t - W(t)} X (and its inverse).
// The field's frame tag must match the direction and gets flipped.
FieldState rescale(const FieldState& f, const BrownianPath& path,
                   const NoiseModel& model, RescaleDirection direction);

// P(sup_{t >= s} (B(t) - t) > a) for standard Brownian motion B, by the
// reflection principle applied after time s:
//   P = Phibar((a+s)/sqrt(s)) + e^{-2a} Phi((a-s)/sqrt(s)).
// Exact for all real a, s > 0.
double sup_drifted_bm_exceedance(double s, double a);

// P(sup_{t >= ||c||^{-1}} h_c(t) > eps). The time change M = B(||c||^2 t)
// reduces this to sup_{t >= s}(B(t) - t) > a with s = ||c|| and
// a = ln(eps)/(alpha-1). method: "closed-form" or "monte-carlo".
// The Monte Carlo route simulates the reduced drift -1 process on
// [s, s + t_trunc] at step dt_mc with Brownian-bridge crossing sampling per
// step and an exact Bernoulli tail draw at the truncation horizon, making the
// estimator unbiased; the analytic tail mass is recorded in the estimate.
ProbabilityEstimate decay_exceedance_probability(
    double c_norm, double epsilon, double alpha, const std::string& method,
    long long n_samples = 100000, std::uint64_t seed = 1,
    double dt_mc = 1e-3, int workers = 0);

}  // namespace snls
