#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snls/grid.hpp"
#include "snls/noise.hpp"
#include "snls/spectral.hpp"

namespace snls {

// Blow-up / scattering proxies. Caps are factors relative to the initial
// field: the gradient trigger fires when ||grad u||_2 exceeds
// grad_cap_factor * max(||grad u0||_2, ||u0||_2), amplitude analogously.
struct BlowupThresholds {
  double grad_cap_factor = 1e3;
  double amp_cap_factor = 1e3;
  double scatter_window = 1.0;  // trailing window length
  double scatter_tol = 1e-2;    // relative residual tolerance (loose)
  double scatter_tol_strict = 1e-3;
};

struct SolverConfig {
  GridSpec grid;
  NoiseModel model;
  double dt = 1e-3;
  double t_end = 1.0;
  Frame frame = Frame::physical;
  int record_stride = 100;  // full snapshot cadence, in steps
  BlowupThresholds thresholds;
};

enum class OutcomeKind { GlobalScattering, Blowup, Undecided };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Undecided;
  double blowup_time = -1.0;
  bool nan_flag = false;
  double final_residual = -1.0;         // at the loose tolerance window
  double final_residual_relative = -1;  // residual / final L2 norm
  double peak_grad = 0.0;
  bool strict_scattering = false;
};

inline const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::GlobalScattering: return "GlobalScattering";
    case OutcomeKind::Blowup: return "Blowup";
    default: return "Undecided";
  }
}

// Per-record-time scalar diagnostics; always recorded, cheaper than fields.
struct NormSeries {
  std::vector<double> times;
  std::vector<double> mass;      // ||u||_2^2
  std::vector<double> grad_l2;   // ||grad u||_2
  std::vector<double> amp_max;   // max |u|
  std::vector<double> h_value;   // h_c at the record time
};

struct TrajectoryRecord {
  SolverConfig config;
  BrownianPath path;
  NormSeries series;
  std::vector<FieldState> snapshots;  // full fields at the record stride
  Outcome outcome;
};

// Exact flow of i u_t = lambda h |u|^{alpha-1} u: a pointwise phase rotation
// u <- e^{-i lambda h |u|^{alpha-1} dt} u. Preserves |u| pointwise.
FieldState nonlinear_phase_step(const FieldState& f, double h_value, double dt,
                                const NoiseModel& model);

// Exact Ito solution of the spatially-constant noise part over a substep:
// X <- e^{DeltaW - mu_hat * Deltat} X.
FieldState noise_multiplier_step(const FieldState& f, const BrownianPath& path,
                                 const NoiseModel& model, double t_from,
                                 double t_to);

// Strang splitting: half free propagation, full nonlinear (+ noise factor in
// the physical frame; h_c at the substep midpoint in the rescaled frame),
// half free propagation. The path mesh must contain every step midpoint.
TrajectoryRecord integrate(const SolverConfig& config, const BrownianPath& path,
                           const FieldState& initial);

// || e^{-i t2 Lap} u(t2) - e^{-i t1 Lap} u(t1) || in L^2 (mass-critical) or
// H^1 (energy-critical). Physical-frame snapshots are rescaled to u first.
double scattering_residual(const TrajectoryRecord& traj, double t1, double t2);

Outcome classify_outcome(const TrajectoryRecord& traj,
                         const BlowupThresholds& thresholds);

// d=1 quintic ground state Q(x) = 3^{1/4} sech^{1/2}(2x), and the grid
// residual of Q'' - Q + Q^5 (max norm) for verifying the profile.
FieldState soliton_profile(const GridSpec& grid, double scale = 1.0);
double soliton_equation_residual(const GridSpec& grid);

}  // namespace snls
