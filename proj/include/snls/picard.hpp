#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "snls/noise.hpp"
#include "snls/spectral.hpp"

namespace snls {

enum class Regime {
  energy_small_time,
  energy_large_time,
  mass_small_time,
  mass_large_time,
};

const char* regime_name(Regime r);

// Smallness budget for one fixed-point construction. The solved parameter is
// delta for the small-time regimes and epsilon (the bound on the trailing
// sup of h) for the large-time regimes, each taken at equality in the
// corresponding condition:
//   energy small:  4 C A (2 delta)^{4/(d-2)} = 1
//   energy large:  4 C eps (2 C E)^{4/(d-2)} = 1
//   mass small:    2^{2+4/d} C A delta^{4/d} = 1
//   mass large:    (2C+1)^{1+4/d} 2C eps M^{4/d} = 1
struct PicardBudget {
  Regime regime = Regime::mass_small_time;
  int d = 1;
  double A = 0.0;  // bound on ||h||_inf (small-time regimes)
  double E = 0.0;  // H^1 bound, > 1 (energy large-time)
  double M = 0.0;  // L^2 bound (mass large-time)
  double C_est = 1.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double lhs = 0.0;  // condition left-hand side at the solved value
  bool satisfied = false;

  // Radius of the contraction ball B for this regime.
  double ball_radius() const;
  // true: ball measured in S^1, false: in S.
  bool ball_uses_gradient() const;
};

PicardBudget solve_budget(Regime regime, double A_or_E_or_M, double C_est,
                          int d);

// A field sampled on the uniform mesh t_j = t0 + j*(t1-t0)/n_t, j = 0..n_t.
struct TimeMesh {
  double t0 = 0.0;
  double t1 = 1.0;
  int n_t = 64;
  double dt() const { return (t1 - t0) / n_t; }
  double time(int j) const { return t0 + j * dt(); }
  std::vector<double> times() const {
    std::vector<double> out(n_t + 1);
    for (int j = 0; j <= n_t; ++j) out[j] = time(j);
    return out;
  }
};

using FieldSeries = std::vector<FieldState>;

struct PicardProblem {
  FieldState initial;  // anchor value at mesh.t0
  std::function<double(double)> h;
  TimeMesh mesh;
  NoiseModel model;  // supplies alpha, lambda_sign, d, criticality
};

// F(u) = |u|^{alpha-1} u, pointwise.
FieldState nonlinearity(const FieldState& f, double alpha);

// Duhamel map Phi(u0; u)(t) = e^{i(t-t0)Lap} u0
//   - i lambda int_{t0}^t e^{i(t-s)Lap} (h |u|^{alpha-1} u) ds,
// trapezoidal in s, exact spectral transport of each quadrature sample.
FieldSeries duhamel_map(const PicardProblem& prob, const FieldSeries& u);

// S(I) distance between two series with the regime's admissible pair.
double series_s_distance(const FieldSeries& a, const FieldSeries& b,
                         const TimeMesh& mesh, double q, double p);
double series_s_norm(const FieldSeries& u, const TimeMesh& mesh, double q,
                     double p, int derivative_order);

struct ContractionReport {
  std::vector<double> iterate_distances;
  double empirical_lipschitz = 0.0;
  std::vector<std::uint64_t> pair_seeds;
  std::vector<double> pair_ratios;
  double ball_radius = 0.0;
  bool stayed_in_ball = true;
  bool budget_satisfied = true;
  bool diverged = false;
  int iterations = 0;
};

// Picard iteration of the Duhamel map from u^0 = free evolution of the
// anchor. Iterates until the successive S(I) distance drops below tol or
// max_iter is reached; measures the empirical Lipschitz ratio of the map
// over n_pairs random in-ball pairs (seeds recorded). A violated budget is a
// warn-and-proceed condition flagged in the report. Throws on divergence
// (distance growing three iterations in a row).
std::pair<FieldSeries, ContractionReport> picard_solve(
    const PicardProblem& prob, const PicardBudget& budget, int max_iter = 25,
    double tol = 1e-10, int n_pairs = 20, std::uint64_t seed = 7);

// Random band-limited field: Gaussian Fourier coefficients on modes
// |m| <= n/8 with spectral decay, deterministic in the seed.
FieldState random_bandlimited_field(const GridSpec& grid, std::uint64_t seed);

struct NonlinearityProbeReport {
  double pointwise_constant = 0.0;      // |F(u)-F(v)| bound ratio max
  double pointwise_constant_half = 0.0; // same, half the sample count
  double norm_ratio_f = 0.0;            // ||F(u)||_N vs product bound
  double norm_ratio_diff = 0.0;         // difference estimate
  double norm_ratio_grad = 0.0;         // gradient estimate (energy case)
  int n_samples = 0;
};

NonlinearityProbeReport probe_nonlinearity_estimates(int d, double alpha,
                                                     int n_samples,
                                                     std::uint64_t seed,
                                                     int n_grid = 0);

// Empirical homogeneous Strichartz constant: sup over random L^2-normalized
// band-limited data of ||e^{it Lap} f||_{L^q L^p([0,horizon])} / ||f||_2.
double estimate_strichartz_constant(int d, double q, double p,
                                    const GridSpec& grid, int n_samples,
                                    double horizon, std::uint64_t seed);

// Empirical inhomogeneous constant: sup over random forcings g of
// ||int_0^t e^{i(t-s)Lap} g ds||_{L^q L^p} / ||g||_{L^{q'} L^{p'}}.
double estimate_inhomogeneous_constant(int d, double q, double p,
                                       const GridSpec& grid, int n_samples,
                                       double horizon, std::uint64_t seed);

}  // namespace snls
