#include "shepherd/ppo/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "shepherd/ppo/checkpoint.hpp"

namespace shepherd::ppo {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

void PpoHyperparams::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
    throw std::invalid_argument("ppo: clip_epsilon must lie in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("ppo: gae_lambda must lie in [0, 1]");
  if (!(discount_gamma > 0.0 && discount_gamma <= 1.0))
    throw std::invalid_argument("ppo: discount_gamma must lie in (0, 1]");
  if (n_envs < 1 || rollout_length < n_envs)
    throw std::invalid_argument("ppo: rollout_length must be at least n_envs");
  if (minibatch_size < 1 || epochs_per_update < 0)
    throw std::invalid_argument("ppo: invalid minibatch or epoch count");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("ppo: learning_rate must be positive");
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("ppo: max_grad_norm must be positive");
}

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std) {
  double lp = 0.0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double z = (action[k] - mean[k]) * std::exp(-log_std[k]);
    lp += -0.5 * z * z - log_std[k] - kHalfLog2Pi;
  }
  return lp;
}

SampledAction sample_action(std::span<const double> mean, std::span<const double> log_std,
                            ActionMode mode, Rng& rng) {
  if (mean.size() != log_std.size())
    throw std::invalid_argument("sample_action: mean/log_std size mismatch");
  for (double s : log_std)
    if (std::isnan(s) || s == INFINITY) throw std::invalid_argument("sample_action: bad log_std");
  SampledAction out;
  out.action.assign(mean.begin(), mean.end());
  if (mode == ActionMode::kStochastic) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < mean.size(); ++k) out.action[k] += std::exp(log_std[k]) * normal(rng);
  }
  out.log_probability = gaussian_log_prob(out.action, mean, log_std);
  return out;
}

void RolloutBuffer::push(std::vector<double> obs, std::vector<double> action, double log_prob,
                         double reward, double value, bool done) {
  observations.push_back(std::move(obs));
  actions.push_back(std::move(action));
  log_probs.push_back(log_prob);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done);
}

void RolloutBuffer::append(const RolloutBuffer& other) {
  observations.insert(observations.end(), other.observations.begin(), other.observations.end());
  actions.insert(actions.end(), other.actions.begin(), other.actions.end());
  log_probs.insert(log_probs.end(), other.log_probs.begin(), other.log_probs.end());
  rewards.insert(rewards.end(), other.rewards.begin(), other.rewards.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
  dones.insert(dones.end(), other.dones.begin(), other.dones.end());
  advantages.insert(advantages.end(), other.advantages.begin(), other.advantages.end());
  returns.insert(returns.end(), other.returns.begin(), other.returns.end());
}

void RolloutBuffer::clear() { *this = RolloutBuffer{}; }

void compute_gae(RolloutBuffer& buffer, const PpoHyperparams& hp) {
  const int n = buffer.size();
  buffer.advantages.assign(n, 0.0);
  buffer.returns.assign(n, 0.0);
  double next_advantage = 0.0;
  double next_value = buffer.bootstrap_value;
  for (int t = n - 1; t >= 0; --t) {
    const double live = buffer.dones[t] ? 0.0 : 1.0;
    const double delta =
        buffer.rewards[t] + hp.discount_gamma * next_value * live - buffer.values[t];
    next_advantage = delta + hp.discount_gamma * hp.gae_lambda * live * next_advantage;
    buffer.advantages[t] = next_advantage;
    buffer.returns[t] = next_advantage + buffer.values[t];
    next_value = buffer.values[t];
  }
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double scale = 1.0 / (std::sqrt(var) + 1e-12);
  for (double& a : advantages) a = (a - mean) * scale;
}

LossReport evaluate_batch(const PolicyNetwork& net, const RolloutBuffer& batch,
                          std::span<const int> indices, const PpoHyperparams& hp, Vector* grad) {
  const auto B = static_cast<Eigen::Index>(indices.size());
  const int obs_dim = net.spec().observation_dim;
  const int act_dim = net.spec().action_dim;
  Matrix obs(obs_dim, B);
  Matrix act(act_dim, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const int i = indices[b];
    obs.col(b) = Eigen::Map<const Vector>(batch.observations[i].data(), obs_dim);
    act.col(b) = Eigen::Map<const Vector>(batch.actions[i].data(), act_dim);
  }

  MlpLayout::Tape actor_tape;
  MlpLayout::Tape critic_tape;
  const auto policy = net.actor_forward(obs, grad ? &actor_tape : nullptr);
  const Matrix values = net.value(obs, grad ? &critic_tape : nullptr);
  const Vector inv_std = (-policy.log_std.array()).exp();

  LossReport rep;
  Vector dloss_dlogp(B);
  const Matrix z = (act - policy.mean).array().colwise() * inv_std.array();
  const double inv_b = 1.0 / static_cast<double>(B);
  const double lo = 1.0 - hp.clip_epsilon;
  const double hi = 1.0 + hp.clip_epsilon;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int i = indices[b];
    const double logp = -0.5 * z.col(b).squaredNorm() - policy.log_std.sum() - act_dim * kHalfLog2Pi;
    const double log_ratio = logp - batch.log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages[i];
    const double clipped = std::clamp(ratio, lo, hi);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    rep.surrogate += std::min(unclipped_term, clipped_term);
    rep.mean_ratio += ratio;
    rep.clip_fraction += (ratio < lo || ratio > hi) ? 1.0 : 0.0;
    rep.approx_kl += (ratio - 1.0) - log_ratio;
    dloss_dlogp[b] = unclipped_term <= clipped_term ? -inv_b * unclipped_term : 0.0;
    const double err = values(0, b) - batch.returns[i];
    rep.value_loss += err * err;
  }
  rep.surrogate *= inv_b;
  rep.mean_ratio *= inv_b;
  rep.clip_fraction *= inv_b;
  rep.approx_kl *= inv_b;
  rep.value_loss *= inv_b;
  rep.entropy = policy.log_std.sum() + act_dim * (0.5 + kHalfLog2Pi);
  rep.objective = rep.surrogate - hp.value_coef * rep.value_loss + hp.entropy_coef * rep.entropy;

  if (grad) {
    // d logp / d mean = z / sigma ; d logp / d log_std = z^2 - 1.
    const Matrix grad_mean =
        (z.array().colwise() * inv_std.array()).rowwise() * dloss_dlogp.transpose().array();
    net.actor_backward(actor_tape, grad_mean, *grad);
    const Vector grad_log_std =
        (z.array().square() - 1.0).matrix() * dloss_dlogp - hp.entropy_coef * Vector::Ones(act_dim);
    grad->segment(net.log_std_offset(), act_dim) += grad_log_std;

    Matrix grad_value(1, B);
    for (Eigen::Index b = 0; b < B; ++b)
      grad_value(0, b) = hp.value_coef * 2.0 * inv_b * (values(0, b) - batch.returns[indices[b]]);
    net.critic_backward(critic_tape, grad_value, *grad);
  }
  return rep;
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double eps)
    : m_(Vector::Zero(size)), v_(Vector::Zero(size)), eps_(eps) {}

void AdamOptimizer::step(Vector& params, const Vector& grad, double learning_rate) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

namespace {

void clip_segment(Vector& grad, Eigen::Index begin, Eigen::Index size, double max_norm) {
  auto seg = grad.segment(begin, size);
  const double norm = seg.norm();
  if (norm > max_norm) seg *= max_norm / norm;
}

}  // namespace

UpdateDiagnostics ppo_update(RolloutBuffer& batch, PolicyNetwork& net, AdamOptimizer& optimizer,
                             const PpoHyperparams& hp, Rng& rng, double learning_rate) {
  UpdateDiagnostics diag;
  const int n = batch.size();
  if (n == 0 || hp.epochs_per_update == 0) return diag;
  if (static_cast<int>(batch.advantages.size()) != n)
    throw std::invalid_argument("ppo_update: advantages missing");
  normalize_advantages(batch.advantages);

  const Vector snapshot = net.parameters();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vector grad(net.parameter_count());
  const Eigen::Index actor_size = net.actor_parameter_count();
  const Eigen::Index critic_size = net.parameter_count() - actor_size;

  for (int epoch = 0; epoch < hp.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0, mb = 0; start < n; start += hp.minibatch_size, ++mb) {
      const int end = std::min(n, start + hp.minibatch_size);
      std::span<const int> idx(order.data() + start, end - start);
      grad.setZero();
      const LossReport rep = evaluate_batch(net, batch, idx, hp, &grad);
      if (!std::isfinite(rep.objective) || !grad.allFinite()) {
        net.parameters() = snapshot;
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss at epoch " << epoch << ", minibatch " << mb
            << " (samples " << start << ".." << end - 1 << ")";
        throw std::runtime_error(msg.str());
      }
      clip_segment(grad, 0, actor_size, hp.max_grad_norm);
      clip_segment(grad, actor_size, critic_size, hp.max_grad_norm);
      optimizer.step(net.parameters(), grad, learning_rate);

      diag.mean_ratio += rep.mean_ratio;
      diag.clip_fraction += rep.clip_fraction;
      diag.value_loss += rep.value_loss;
      diag.surrogate += rep.surrogate;
      diag.entropy += rep.entropy;
      diag.approx_kl += rep.approx_kl;
      ++diag.minibatches;
    }
  }
  const double inv = 1.0 / diag.minibatches;
  diag.mean_ratio *= inv;
  diag.clip_fraction *= inv;
  diag.value_loss *= inv;
  diag.surrogate *= inv;
  diag.entropy *= inv;
  diag.approx_kl *= inv;
  return diag;
}

void write_training_log(const std::filesystem::path& path,
                        const std::vector<EpisodeRecord>& episodes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log " + path.string());
  out << "episode_index,env_steps,episodic_reward,smoothed_reward,mean_clip_fraction,value_loss\n";
  out.precision(10);
  for (const auto& e : episodes)
    out << e.episode_index << ',' << e.env_steps << ',' << e.episodic_reward << ','
        << e.smoothed_reward << ',' << e.mean_clip_fraction << ',' << e.value_loss << '\n';
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

TrainResult train(const EnvFactory& make_env, const PpoHyperparams& hp, NetworkSpec spec,
                  const TrainOptions& options) {
  hp.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(hp.seed);

  std::vector<std::unique_ptr<Environment>> envs;
  for (int e = 0; e < hp.n_envs; ++e) envs.push_back(make_env(e));
  spec.observation_dim = envs.front()->observation_dim();
  spec.action_dim = envs.front()->action_dim();
  spec.action_bound = envs.front()->action_bound();

  TrainResult result;
  result.policy = PolicyNetwork::initialized(spec, rng());
  PolicyNetwork& net = result.policy;
  AdamOptimizer optimizer(net.parameter_count(), hp.adam_eps);

  if (!options.output_dir.empty()) std::filesystem::create_directories(options.output_dir);

  const int obs_dim = spec.observation_dim;
  const int steps_per_env = hp.rollout_length / hp.n_envs;
  const long long per_update = static_cast<long long>(steps_per_env) * hp.n_envs;
  const long long num_updates = std::max<long long>(1, hp.total_env_steps / per_update);

  std::vector<std::vector<double>> current_obs(hp.n_envs);
  std::vector<double> episode_return(hp.n_envs, 0.0);
  for (int e = 0; e < hp.n_envs; ++e) current_obs[e] = envs[e]->reset(rng());

  long long env_steps = 0;
  double last_clip = 0.0;
  double last_value_loss = 0.0;
  std::vector<RolloutBuffer> streams(hp.n_envs);
  Matrix obs_batch(obs_dim, hp.n_envs);

  auto record_episode = [&](double total) {
    EpisodeRecord rec;
    rec.episode_index = static_cast<int>(result.episodes.size());
    rec.env_steps = env_steps;
    rec.episodic_reward = total;
    const int w = std::min<int>(options.smoothing_window, rec.episode_index + 1);
    double acc = total;
    for (int k = 1; k < w; ++k) acc += result.episodes[rec.episode_index - k].episodic_reward;
    rec.smoothed_reward = acc / w;
    rec.mean_clip_fraction = last_clip;
    rec.value_loss = last_value_loss;
    result.episodes.push_back(rec);
  };

  for (long long update = 0; update < num_updates; ++update) {
    for (auto& s : streams) s.clear();
    for (int t = 0; t < steps_per_env; ++t) {
      for (int e = 0; e < hp.n_envs; ++e)
        obs_batch.col(e) = Eigen::Map<const Vector>(current_obs[e].data(), obs_dim);
      const auto policy = net.actor_forward(obs_batch);
      const Matrix values = net.value(obs_batch);
      const Vector& log_std = policy.log_std;
      for (int e = 0; e < hp.n_envs; ++e) {
        const Vector mean = policy.mean.col(e);
        auto sampled = sample_action(std::span<const double>(mean.data(), mean.size()),
                                     std::span<const double>(log_std.data(), log_std.size()),
                                     ActionMode::kStochastic, rng);
        Transition tr = envs[e]->step(sampled.action);
        ++env_steps;
        episode_return[e] += tr.reward;
        double reward = tr.reward;
        if (tr.done && tr.truncated) {
          const Matrix last = Eigen::Map<const Vector>(tr.observation.data(), obs_dim);
          reward += hp.discount_gamma * net.value(last)(0, 0);
        }
        streams[e].push(std::move(current_obs[e]), std::move(sampled.action),
                        sampled.log_probability, reward, values(0, e), tr.done);
        if (tr.done) {
          record_episode(episode_return[e]);
          episode_return[e] = 0.0;
          current_obs[e] = envs[e]->reset(rng());
        } else {
          current_obs[e] = std::move(tr.observation);
        }
      }
    }

    RolloutBuffer batch;
    for (int e = 0; e < hp.n_envs; ++e)
      obs_batch.col(e) = Eigen::Map<const Vector>(current_obs[e].data(), obs_dim);
    const Matrix bootstrap = net.value(obs_batch);
    for (int e = 0; e < hp.n_envs; ++e) {
      streams[e].bootstrap_value = bootstrap(0, e);
      compute_gae(streams[e], hp);
      batch.append(streams[e]);
    }

    const double frac = hp.anneal_lr ? 1.0 - static_cast<double>(update) / num_updates : 1.0;
    const UpdateDiagnostics diag =
        ppo_update(batch, net, optimizer, hp, rng, hp.learning_rate * frac);
    result.updates.push_back(diag);
    last_clip = diag.clip_fraction;
    last_value_loss = diag.value_loss;

    if (options.verbose && (update % 10 == 0 || update + 1 == num_updates)) {
      const double smoothed =
          result.episodes.empty() ? 0.0 : result.episodes.back().smoothed_reward;
      std::cerr << "update " << update + 1 << "/" << num_updates << " steps " << env_steps
                << " smoothed_reward " << smoothed << " clip " << diag.clip_fraction
                << " value_loss " << diag.value_loss << " std "
                << net.log_std().array().exp().mean() << '\n';
    }
    if (!options.output_dir.empty() && hp.checkpoint_every > 0 &&
        (update + 1) % hp.checkpoint_every == 0) {
      save_checkpoint(net, options.output_dir / "checkpoint_latest.txt");
      write_training_log(options.output_dir / "training_log.csv", result.episodes);
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!options.output_dir.empty()) {
    save_checkpoint(net, options.output_dir / "policy.txt");
    write_training_log(options.output_dir / "training_log.csv", result.episodes);
  }
  return result;
}

}  // namespace shepherd::ppo
