#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "shepherd/config.hpp"
#include "shepherd/metrics.hpp"
#include "shepherd/physics.hpp"
#include "shepherd/ppo/network.hpp"
#include "shepherd/ppo/ppo.hpp"

namespace shepherd {

/// Environment factory for training: env i gets rng seed env.rng_seed + i and
/// no gain adaptation.
ppo::EnvFactory shepherd_env_factory(const ExperimentConfig& cfg);

/// Trains a policy with the configured hyperparameters.
ppo::TrainResult train_policy(const ExperimentConfig& cfg, const ppo::TrainOptions& options);

/// Maps an observation to herder velocities.
using Controller = std::function<std::vector<double>(const std::vector<double>&)>;

/// Deterministic policy: the actor mean.
Controller policy_controller(const ppo::PolicyNetwork& net);

struct RunSettings {
  double disturbance_vd = 0.0;
  double noise_std_Dm = 0.0;
  double alpha = 0.2;
  /// Gain adaptation is frozen (K stays at its initial value) before this
  /// time.
  double adapt_start = 0.0;
  double initial_gain = 1.0;
  /// Keep a density snapshot every this many control steps (0 = none).
  int snapshot_every = 0;
};

/// Per-step history of a closed-loop run, sampled at t_k = k dt, k = 0..K.
struct RunTrace {
  std::vector<double> times;
  std::vector<double> error;
  std::vector<double> gain;
  std::vector<std::vector<double>> positions;
  /// Applied actions for k = 0..K-1 (one fewer than the other series).
  std::vector<std::vector<double>> actions;
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> snapshots;
  DensityField final_density;
};

struct RunRecord {
  std::uint64_t seed = 0;
  double disturbance_vd = 0.0;
  double noise_std_Dm = 0.0;
  double alpha = 0.0;
  double e_T_ss = 0.0;
  double u_m = 0.0;
  double tau_H = 0.0;
  double tau_T = 0.0;
  double final_K = 0.0;
  /// Time after which |u| stays below 1% of v_max.
  double effort_decay_time = 0.0;
  std::string config_hash;
};

/// Herders start uniformly at random (from seed), the target density starts
/// uniform, and the controller closes the loop over T_horizon with the PDE
/// co-simulated and the gain adapted online.
RunTrace run_closed_loop(const Controller& controller, const PhysicsConfig& physics,
                         const RunSettings& settings, std::uint64_t seed);

/// Same with explicit initial herder positions.
RunTrace run_closed_loop_from(const Controller& controller, const PhysicsConfig& physics,
                              const RunSettings& settings, std::vector<double> initial_positions,
                              std::uint64_t noise_seed);

RunRecord summarize_run(const RunTrace& trace, const PhysicsConfig& physics,
                        const RunSettings& settings, std::uint64_t seed);

struct ExperimentReport {
  std::string name;
  std::vector<RunRecord> records;

  std::vector<double> column(double RunRecord::*field) const;
  /// Records whose sweep parameter equals value.
  std::vector<RunRecord> where(double RunRecord::*param, double value) const;
};

/// Runs tasks 0..n-1 on a worker pool; results are indexed by task, so the
/// output order does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& task);

/// Independent closed-loop runs, one per seed, with the same settings.
ExperimentReport run_evaluation(const Controller& controller, const ExperimentConfig& cfg,
                                const std::vector<std::uint64_t>& seeds,
                                const RunSettings& settings);

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

/// Adaptive-gain ablation: one run with K frozen at 1 until switch_time and
/// adapted afterwards, and a reference run with adaptation disabled
/// throughout. Both start from the same herder positions.
struct AblationResult {
  RunTrace adaptive;
  RunTrace fixed;
  double switch_time = 0.0;
  double error_at_switch = 0.0;
  /// Relative error reduction of the adaptive run at switch_time + window.
  double reduction_at_window = 0.0;
  double window = 15.0;
  /// Largest relative reduction reached after the switch, and when 95% of it
  /// was first achieved (measured from the switch).
  double max_reduction = 0.0;
  double time_to_95pct = 0.0;
};

AblationResult run_adaptive_ablation(const Controller& controller, const ExperimentConfig& cfg,
                                     double switch_time, std::uint64_t seed, double alpha,
                                     double window = 15.0);

/// `points` evenly spaced values on [0, max].
std::vector<double> linspace(double max, int points);

ExperimentReport run_disturbance_sweep(const Controller& controller, const ExperimentConfig& cfg,
                                       const std::vector<double>& vd_values,
                                       const std::vector<std::uint64_t>& seeds);

ExperimentReport run_noise_sweep(const Controller& controller, const ExperimentConfig& cfg,
                                 const std::vector<double>& Dm_values, int runs_per_value,
                                 std::uint64_t base_seed);

/// Fixed herders held for the whole run; used by the oracle check and the
/// `simulate` command.
struct OracleCase {
  std::vector<double> herders;
  double gain_K = 1.0;
};

struct OracleResult {
  OracleCase config;
  /// Long-run PDE vs closed-form stationary density.
  double pde_vs_closed_form = 0.0;
  /// Particle histogram vs PDE at the match time (negative when skipped).
  double sde_vs_pde = -1.0;
  double pde_mass_error = 0.0;
};

struct OracleSettings {
  double long_horizon = 2000.0;
  double match_time = 50.0;
  /// Number of particles; 0 skips the particle comparison.
  int particles = 10000;
  /// Histogram bins for the particle comparison.
  int bins = 50;
  std::uint64_t seed = 7;
};

std::vector<OracleCase> default_oracle_cases();
std::vector<OracleResult> run_oracle_check(const PhysicsConfig& physics,
                                           const std::vector<OracleCase>& cases,
                                           const OracleSettings& settings, int threads = 0);

/// Particle ensemble vs PDE at t = match_time for fixed herders.
double micro_macro_gap(const PhysicsConfig& physics, const OracleCase& c, double match_time,
                       int particles, int bins, std::uint64_t seed);

/// Density snapshots under fixed herders, starting from the uniform density.
struct Snapshots {
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
};
Snapshots simulate_fixed(const PhysicsConfig& physics, const OracleCase& c, double t_end,
                         double snapshot_interval);

// Output helpers.
void write_records_csv(const std::filesystem::path& path, const ExperimentReport& report);
/// Aggregate statistics of every metric, grouped by (disturbance_vd,
/// noise_std_Dm).
void write_summary_json(const std::filesystem::path& path, const ExperimentReport& report,
                        const ExperimentConfig& cfg);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);
void write_ablation_csv(const std::filesystem::path& path, const AblationResult& result);
/// Rows = snapshot times, first column = time, remaining = node values.
void write_snapshots_csv(const std::filesystem::path& path, const std::vector<double>& times,
                         const std::vector<std::vector<double>>& rows);
void write_oracle_csv(const std::filesystem::path& path, const std::vector<OracleResult>& results);

}  // namespace shepherd
