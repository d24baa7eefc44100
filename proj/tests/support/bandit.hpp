#pragma once

#include <cmath>
#include <memory>

#include "shepherd/ppo/ppo.hpp"

namespace testing_support {

/// One-step episodes with a constant observation; reward 1 when the action is
/// positive, 0 otherwise.
class TwoArmedBandit final : public shepherd::ppo::Environment {
 public:
  int observation_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  double action_bound() const override { return 1.0; }
  std::vector<double> reset(std::uint64_t) override { return {1.0}; }
  shepherd::ppo::Transition step(std::span<const double> action) override {
    return {{1.0}, action[0] > 0.0 ? 1.0 : 0.0, true, false};
  }
};

struct BanditOutcome {
  double p_optimal = 0.0;
  int updates = 0;
};

/// Trains on the bandit for `updates` updates and returns the probability
/// mass the final Gaussian policy puts on positive actions.
inline BanditOutcome train_bandit(int updates, std::uint64_t seed) {
  using namespace shepherd::ppo;
  PpoHyperparams hp;
  hp.n_envs = 1;
  hp.rollout_length = 64;
  hp.minibatch_size = 16;
  hp.epochs_per_update = 4;
  hp.learning_rate = 1e-3;
  hp.anneal_lr = false;
  hp.checkpoint_every = 0;
  hp.total_env_steps = static_cast<long long>(updates) * hp.rollout_length;
  hp.seed = seed;
  NetworkSpec spec;
  spec.observation_dim = 1;
  spec.action_dim = 1;
  spec.action_bound = 1.0;
  const auto result =
      train([](int) { return std::make_unique<TwoArmedBandit>(); }, hp, spec, {});
  const auto out = result.policy.actor_forward(std::vector<double>{1.0});
  const double mean = out.mean(0, 0);
  const double sigma = std::exp(out.log_std[0]);
  return {0.5 * std::erfc(-mean / (sigma * std::sqrt(2.0))), static_cast<int>(result.updates.size())};
}

}  // namespace testing_support
