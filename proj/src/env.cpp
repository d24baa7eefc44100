#include "shepherd/env.hpp"

#include <cmath>
#include <stdexcept>

namespace shepherd {

std::string to_string(RewardMode mode) {
  return mode == RewardMode::kSteadyState ? "steady-state" : "full-density";
}

RewardMode reward_mode_from_string(const std::string& name) {
  if (name == "steady-state") return RewardMode::kSteadyState;
  if (name == "full-density") return RewardMode::kFullDensity;
  throw std::invalid_argument("unknown reward_mode '" + name + "'");
}

void EnvConfig::validate() const {
  if (episode_steps < 1) throw std::invalid_argument("env: episode_steps must be positive");
  if (!(reward_k2 >= 0.0) || !(reward_k1 >= reward_k2))
    throw std::invalid_argument("env: reward weights must satisfy k1 >= k2 >= 0");
  if (!(noise_std_Dm >= 0.0)) throw std::invalid_argument("env: noise_std_Dm must be >= 0");
  if (!(gain_K > 0.0)) throw std::invalid_argument("env: gain_K must be positive");
}

std::vector<double> encode_observation(std::span<const double> positions) {
  std::vector<double> obs;
  obs.reserve(2 * positions.size());
  for (double h : positions) {
    obs.push_back(std::cos(h));
    obs.push_back(std::sin(h));
  }
  return obs;
}

double reward_from_error(double error, std::span<const double> action, double k1, double k2) {
  double effort = 0.0;
  for (double u : action) effort += u * u;
  return -k1 * error * error - k2 * effort;
}

double reward_ss(const HerderConfiguration& herders, double gain_K,
                 std::span<const double> action, const EnvConfig& cfg,
                 const DensityField& desired, const SteadyStateParams& params) {
  return reward_from_error(ss_error(herders, gain_K, desired, params), action, cfg.reward_k1,
                           cfg.reward_k2);
}

double reward_full(const DensityField& density, const DensityField& desired,
                   std::span<const double> action, const EnvConfig& cfg) {
  return reward_from_error(l2_norm(desired, density), action, cfg.reward_k1, cfg.reward_k2);
}

ShepherdEnv::ShepherdEnv(PhysicsConfig physics, EnvConfig cfg)
    : physics_(physics), cfg_(cfg), desired_(physics.desired()), rng_(cfg.rng_seed) {
  physics_.validate();
  cfg_.validate();
  herders_.v_max = physics_.v_max;
  herders_.positions.assign(physics_.n_herders, 0.0);
  herders_.last_actions.assign(physics_.n_herders, 0.0);
}

std::vector<double> ShepherdEnv::observe() {
  if (cfg_.noise_std_Dm <= 0.0) return encode_observation(herders_.positions);
  std::normal_distribution<double> noise(0.0, cfg_.noise_std_Dm);
  std::vector<double> measured = herders_.positions;
  for (double& h : measured) h += noise(rng_);
  return encode_observation(measured);
}

std::vector<double> ShepherdEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  // Negating the half-open draw [-pi, pi) gives (-pi, pi].
  std::uniform_real_distribution<double> uniform(-kPi, kPi);
  std::vector<double> positions(physics_.n_herders);
  for (double& h : positions) h = -uniform(rng_);
  start_episode(std::move(positions));
  return observe();
}

std::vector<double> ShepherdEnv::reset_to(std::span<const double> positions, std::uint64_t seed) {
  if (static_cast<int>(positions.size()) != physics_.n_herders)
    throw std::invalid_argument("reset_to: one position per herder required");
  rng_.seed(seed);
  start_episode(std::vector<double>(positions.begin(), positions.end()));
  return observe();
}

void ShepherdEnv::start_episode(std::vector<double> positions) {
  for (double& h : positions) h = wrap(h);
  herders_.positions = std::move(positions);
  herders_.last_actions.assign(physics_.n_herders, 0.0);
  step_index_ = 0;
  gain_ = cfg_.gain_K;
  if (cfg_.reward_mode == RewardMode::kFullDensity)
    solver_.emplace(DensityField::uniform(physics_.grid(), physics_.M_T), physics_.pde());
  else
    solver_.reset();
}

StepResult ShepherdEnv::step_detailed(std::span<const double> action) {
  if (step_index_ >= cfg_.episode_steps)
    throw std::logic_error("ShepherdEnv::step called on a finished episode");
  if (solver_) {
    solver_->advance_window(
        FaceVelocity::from_herders(physics_.grid(), herder_configuration(), gain_,
                                   physics_.kernel()));
  }
  herders_ = herder_step(herders_, action, cfg_.disturbance_vd, physics_.dt);
  ++step_index_;

  StepResult result;
  result.positions = herders_.positions;
  result.applied_actions = herders_.last_actions;
  result.ss_error = ss_error(herder_configuration(), gain_, desired_, physics_.steady_state());
  if (cfg_.reward_mode == RewardMode::kSteadyState) {
    result.reward = reward_from_error(result.ss_error, herders_.last_actions, cfg_.reward_k1,
                                      cfg_.reward_k2);
  } else {
    result.reward = reward_full(solver_->density(), desired_, herders_.last_actions, cfg_);
  }
  result.done = step_index_ >= cfg_.episode_steps;
  result.observation = observe();
  return result;
}

ppo::Transition ShepherdEnv::step(std::span<const double> action) {
  StepResult r = step_detailed(action);
  return {std::move(r.observation), r.reward, r.done, r.done};
}

}  // namespace shepherd
