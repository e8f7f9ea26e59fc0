#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "snls/solver.hpp"
#include "snls/stats.hpp"

namespace snls {

// Named initial-data profiles.
//   gaussian: amplitude * exp(-|x|^2 / (2 width^2))
//   soliton_scaled: factor * Q with Q the d=1 quintic ground state
struct InitialRecipe {
  std::string kind = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  double factor = 1.1;
};

FieldState make_initial(const InitialRecipe& recipe, const GridSpec& grid,
                        Frame frame);

struct SweepConfig {
  GridSpec grid;
  double dt = 1e-3;
  double t_end = 10.0;
  BlowupThresholds thresholds;
  double alpha = 5.0;
  int lambda_sign = -1;
  InitialRecipe initial;
  std::vector<double> c_norm_list;
  int n_paths = 100;
  std::uint64_t base_seed = 1;
  int record_stride = 500;
  int workers = 0;  // 0: hardware concurrency
};

struct TrajectorySummary {
  std::uint64_t seed = 0;
  OutcomeKind outcome = OutcomeKind::Undecided;
  double blowup_time = -1.0;
  double final_residual_relative = -1.0;
  double peak_grad = 0.0;
  bool strict_scattering = false;
  std::string error;  // per-trajectory failure, recorded, never fatal
};

struct StrengthResult {
  double c_norm = 0.0;
  ProbabilityEstimate p_scattering;
  int n_scattering = 0;
  int n_blowup = 0;
  int n_undecided = 0;
  double mean_peak_grad = 0.0;
  std::vector<TrajectorySummary> trajectories;
};

struct SweepReport {
  SweepConfig config;
  std::string config_hash;
  std::string version;
  std::vector<StrengthResult> results;
};

// The headline study: for each noise strength s the noise is the single real
// mode phi = (s), so ||c|| = s. Physical-frame trajectories, outcome
// classification, Wilson intervals. Bit-reproducible from (config, seeds)
// regardless of worker count.
SweepReport run_sweep(const SweepConfig& sweep);

struct MartingaleAudit {
  std::vector<double> checkpoints;
  std::vector<double> mean_mass_ratio;   // ensemble mean of mass(t)/mass(0)
  std::vector<double> mean_mass_se;
  std::vector<double> max_identity_error;  // per-path exact-identity residual
  std::vector<double> increment_correlation;
  bool mean_within_3se = true;
  bool identity_ok = true;
  bool increments_uncorrelated = true;
};

// (a) E mass(t) = mass(0) within 3 SE, (b) pathwise
// ||X(t)||^2 = ||X0||^2 e^{2M - 2||c||^2 t} to 1e-10 relative,
// (c) mass increments uncorrelated with the running level.
MartingaleAudit martingale_audit(const NoiseModel& model, int n_paths,
                                 const std::vector<double>& t_checkpoints,
                                 std::uint64_t seed, int workers = 0);

struct EquivalenceRow {
  double dt = 0.0;
  double err = 0.0;  // sup over checkpoints of relative L2 frame distance
};

// Solve the physical-frame equation, rescale, and compare against the direct
// rescaled-frame run on the same driving path, for each dt in the ladder.
std::vector<EquivalenceRow> equivalence_audit(const GridSpec& grid,
                                              const NoiseModel& model,
                                              const FieldState& initial_physical,
                                              double t_end,
                                              const std::vector<double>& dt_ladder,
                                              std::uint64_t seed);

struct VirialSeries {
  std::vector<double> times;
  std::vector<double> values;
  bool boundary_warning = false;
  double max_boundary_fraction = 0.0;
};

VirialSeries virial_track(const TrajectoryRecord& traj);

// Run persistence: manifest.json (config echo + hash + version), summary.csv,
// trajectories.jsonl under dir. load_run validates the hash
// (version-mismatch) and required files (corrupt-manifest).
void persist_run(const SweepReport& report, const std::string& dir);
SweepReport load_run(const std::string& dir);

std::string sweep_config_hash(const SweepConfig& config);

// key = value sweep config file parser (documented in the README).
SweepConfig parse_sweep_config(const std::string& path);

}  // namespace snls
