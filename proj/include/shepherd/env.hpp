#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shepherd/fokker_planck.hpp"
#include "shepherd/micro_sim.hpp"
#include "shepherd/physics.hpp"
#include "shepherd/ppo/environment.hpp"

namespace shepherd {

enum class RewardMode {
  /// Error of the closed-form stationary density at the current herders.
  kSteadyState,
  /// Error of a co-simulated PDE density (slow; validation only).
  kFullDensity,
};

std::string to_string(RewardMode mode);
RewardMode reward_mode_from_string(const std::string& name);

struct EnvConfig {
  int episode_steps = 500;
  double reward_k1 = 10.0;
  double reward_k2 = 0.01;
  RewardMode reward_mode = RewardMode::kSteadyState;
  double disturbance_vd = 0.0;
  double noise_std_Dm = 0.0;
  double gain_K = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// [cos H_1, sin H_1, ..., cos H_N, sin H_N].
std::vector<double> encode_observation(std::span<const double> positions);

/// -k1 e^2 - k2 |u|^2.
double reward_from_error(double error, std::span<const double> action, double k1, double k2);

double reward_ss(const HerderConfiguration& herders, double gain_K,
                 std::span<const double> action, const EnvConfig& cfg,
                 const DensityField& desired, const SteadyStateParams& params);

double reward_full(const DensityField& density, const DensityField& desired,
                   std::span<const double> action, const EnvConfig& cfg);

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  // Diagnostics.
  std::vector<double> positions;
  std::vector<double> applied_actions;
  double ss_error = 0.0;
};

/// Herders on the circle, rewarded for parking where the stationary target
/// density is closest to the desired one.
class ShepherdEnv final : public ppo::Environment {
 public:
  ShepherdEnv(PhysicsConfig physics, EnvConfig cfg);

  int observation_dim() const override { return 2 * physics_.n_herders; }
  int action_dim() const override { return physics_.n_herders; }
  double action_bound() const override { return physics_.v_max; }

  /// Draws herder positions uniformly on the circle and returns the
  /// (possibly noisy) observation.
  std::vector<double> reset(std::uint64_t seed) override;
  /// Resets to the given positions instead of sampling them.
  std::vector<double> reset_to(std::span<const double> positions, std::uint64_t seed);

  ppo::Transition step(std::span<const double> action) override;
  StepResult step_detailed(std::span<const double> action);

  const HerderState& herders() const { return herders_; }
  HerderConfiguration herder_configuration() const { return {herders_.positions, physics_.M_H}; }
  int step_index() const { return step_index_; }
  double gain() const { return gain_; }
  const DensityField& desired() const { return desired_; }
  const PhysicsConfig& physics() const { return physics_; }
  const EnvConfig& config() const { return cfg_; }
  /// Co-simulated density; only present in full-density mode.
  const std::optional<PdeSolver>& solver() const { return solver_; }

 private:
  std::vector<double> observe();
  void start_episode(std::vector<double> positions);

  PhysicsConfig physics_;
  EnvConfig cfg_;
  DensityField desired_;
  HerderState herders_;
  std::optional<PdeSolver> solver_;
  Rng rng_;
  double gain_ = 1.0;
  int step_index_ = 0;
};

}  // namespace shepherd
