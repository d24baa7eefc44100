#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shepherd/env.hpp"
#include "shepherd/physics.hpp"
#include "shepherd/ppo/network.hpp"
#include "shepherd/ppo/ppo.hpp"

namespace shepherd {

/// Settings of the evaluation and robustness experiments.
struct EvalConfig {
  int n_runs = 10;
  std::uint64_t base_seed = 1000;
  double switch_time = 75.0;
  int sweep_points = 21;
  double vd_max = 0.6;
  double Dm_max = 2.0 * kPi / 5.0;
  int noise_runs = 100;
  /// Horizon for the long-run PDE in the oracle check.
  double oracle_horizon = 2000.0;
  int oracle_particles = 10000;
  double oracle_match_time = 50.0;
  int threads = 0;  // 0 = hardware concurrency
};

struct ExperimentConfig {
  PhysicsConfig physics;
  EnvConfig env;
  ppo::PpoHyperparams ppo;
  int hidden_layers = 4;
  int hidden_width = 64;
  double log_std_init = 0.0;
  EvalConfig eval;

  ppo::NetworkSpec network_spec() const;
  void validate() const;
};

/// Reads an INI-style key = value file. Table I parameters live at the top
/// level (dx_nodes, dt, dt_pde, T_horizon, N_herders, D, L, kappa, v_max,
/// M_H, M_T, alpha); [env], [ppo] and [eval] sections hold the rest. Unknown
/// keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// Applies "key=value" or "section.key=value".
void apply_override(ExperimentConfig& cfg, const std::string& assignment);
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Canonical INI text with every key; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& cfg);

/// FNV-1a of to_ini(cfg), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace shepherd
