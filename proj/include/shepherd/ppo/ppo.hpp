#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "shepherd/ppo/environment.hpp"
#include "shepherd/ppo/network.hpp"

namespace shepherd::ppo {

using Rng = std::mt19937_64;

struct PpoHyperparams {
  double discount_gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  /// Transitions collected per update, summed over all environments.
  int rollout_length = 2048;
  int minibatch_size = 64;
  int epochs_per_update = 10;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  long long total_env_steps = 1'000'000;
  /// Applied separately to the actor (with log_std) and critic gradients.
  double max_grad_norm = 0.5;

  int n_envs = 4;
  /// Linearly decay the learning rate to zero over training.
  bool anneal_lr = true;
  double adam_eps = 1e-5;
  /// Write a checkpoint every this many updates (0 disables periodic saves).
  int checkpoint_every = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ActionMode { kStochastic, kDeterministic };

struct SampledAction {
  std::vector<double> action;
  double log_probability = 0.0;
};

/// Diagonal Gaussian log-density.
double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std);

/// Stochastic: mean + exp(log_std) * xi. Deterministic: the mean itself. The
/// log-probability is of the returned, unclipped action.
SampledAction sample_action(std::span<const double> mean, std::span<const double> log_std,
                            ActionMode mode, Rng& rng);

/// Transitions of one environment stream, in time order.
struct RolloutBuffer {
  std::vector<std::vector<double>> observations;
  std::vector<std::vector<double>> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;
  /// Value estimate of the state after the last transition.
  double bootstrap_value = 0.0;

  std::vector<double> advantages;
  std::vector<double> returns;

  int size() const { return static_cast<int>(rewards.size()); }
  void push(std::vector<double> obs, std::vector<double> action, double log_prob, double reward,
            double value, bool done);
  /// Appends another stream whose advantages are already computed.
  void append(const RolloutBuffer& other);
  void clear();
};

/// Generalized advantage estimation; fills advantages and returns.
void compute_gae(RolloutBuffer& buffer, const PpoHyperparams& hp);

/// Shift and scale to zero mean and unit (population) variance.
void normalize_advantages(std::vector<double>& advantages);

struct LossReport {
  double surrogate = 0.0;  // E[min(r A, clip(r) A)]
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double approx_kl = 0.0;
  /// surrogate - value_coef * value_loss + entropy_coef * entropy
  double objective = 0.0;
};

/// Evaluates the clipped PPO objective on the given sample indices. When grad
/// is non-null, adds the gradient of -objective (the minimized loss).
LossReport evaluate_batch(const PolicyNetwork& net, const RolloutBuffer& batch,
                          std::span<const int> indices, const PpoHyperparams& hp,
                          Vector* grad = nullptr);

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(Eigen::Index size, double eps = 1e-5);
  void step(Vector& params, const Vector& grad, double learning_rate);
  long long steps() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-5;
  long long t_ = 0;
};

struct UpdateDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double surrogate = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
};

/// Clipped-surrogate update over epochs of shuffled minibatches. The batch
/// must have advantages and returns; advantages are normalized in place.
/// Throws std::runtime_error naming the epoch and minibatch if the loss turns
/// non-finite, leaving the weights as they were before the call.
UpdateDiagnostics ppo_update(RolloutBuffer& batch, PolicyNetwork& net, AdamOptimizer& optimizer,
                             const PpoHyperparams& hp, Rng& rng, double learning_rate);

struct EpisodeRecord {
  int episode_index = 0;
  long long env_steps = 0;
  double episodic_reward = 0.0;
  double smoothed_reward = 0.0;
  double mean_clip_fraction = 0.0;
  double value_loss = 0.0;
};

struct TrainOptions {
  /// Empty disables all file output.
  std::filesystem::path output_dir;
  int smoothing_window = 20;
  bool verbose = false;
};

struct TrainResult {
  PolicyNetwork policy;
  std::vector<EpisodeRecord> episodes;
  std::vector<UpdateDiagnostics> updates;
  double wall_seconds = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(int env_index)>;

/// Alternates stochastic rollouts over hp.n_envs environments with
/// ppo_update until hp.total_env_steps transitions have been collected.
/// Bit-reproducible for a fixed hp.seed.
TrainResult train(const EnvFactory& make_env, const PpoHyperparams& hp, NetworkSpec spec,
                  const TrainOptions& options = {});

/// Writes the per-episode CSV log.
void write_training_log(const std::filesystem::path& path,
                        const std::vector<EpisodeRecord>& episodes);

}  // namespace shepherd::ppo
