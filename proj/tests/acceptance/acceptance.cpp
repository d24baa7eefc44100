// Acceptance suite: one PASS/FAIL line per criterion.
//   --group properties   criteria 1-6, no training
//   --group training     criteria 7-12, trains a policy with the default config

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "../support/bandit.hpp"
#include "../unit/oracles.hpp"
#include "CLI11.hpp"
#include "json.hpp"
#include "shepherd/experiments.hpp"
#include "shepherd/interaction.hpp"
#include "shepherd/metrics.hpp"

using namespace shepherd;

namespace {

// Tolerances.
constexpr double kMassTol = 1e-9;
constexpr double kClosedFormTol = 1e-3;
constexpr double kUniformTol = 1e-6;
constexpr double kParticleTol = 0.05;
constexpr double kAntiderivativeTol = 1e-6;
constexpr double kGradientTol = 1e-4;
constexpr double kBanditTarget = 0.9;
constexpr double kSurrogateTol = 1e-12;
constexpr double kErrorLow = 0.02;
constexpr double kErrorHigh = 0.06;
constexpr double kIqrMax = 0.02;
constexpr double kEffortMax = 0.3;
constexpr double kSettlingRatio = 0.5;  // "well below": tau_H <= 0.5 tau_T
constexpr double kTargetSettlingMax = 120.0;
constexpr double kAblationReduction = 0.2;
constexpr double kAblationWindow = 15.0;
constexpr double kAblationSwitch = 75.0;
constexpr double kDisturbanceIncrease = 0.15;
constexpr double kDisturbanceAbsolute = 0.034;
constexpr double kDisturbanceAbsoluteTol = 0.015;
constexpr double kNoiseTol = 0.015;
constexpr double kPlateauFraction = 0.1;
constexpr double kTrainingWallMax = 3600.0;

struct Tally {
  int failed = 0;
  nlohmann::json results = nlohmann::json::array();

  void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
    results.push_back({{"criterion", criterion}, {"pass", pass}, {"detail", detail}});
  }
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v) { return summarize(v).median; }

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 1. Mass over a full horizon with herders moving and the gain changing.
void mass_conservation(Tally& tally) {
  const PhysicsConfig phys;
  const PeriodicGrid grid = phys.grid();
  std::vector<double> bump(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    bump[i] = 1.0 + 0.5 * std::cos(grid.node(i) - 0.4) + 0.2 * std::sin(3.0 * grid.node(i));
  const double scale = phys.M_T / (grid.dx() * std::accumulate(bump.begin(), bump.end(), 0.0));
  for (double& v : bump) v *= scale;
  PdeSolver solver(DensityField(grid, bump), phys.pde());
  double worst = std::abs(integrate(solver.density()) - phys.M_T);
  for (int k = 0; k < phys.horizon_steps(); ++k) {
    const double t = k * phys.dt;
    const HerderConfiguration herders{
        {wrap(-2.0 + 1.5 * std::sin(0.1 * t)), wrap(2.0 + 0.8 * t)}, phys.M_H};
    const double K = 1.0 + 0.5 * std::sin(0.05 * t);
    solver.advance_window(FaceVelocity::from_herders(grid, herders, K, phys.kernel()));
    worst = std::max(worst, std::abs(integrate(solver.density()) - phys.M_T));
  }
  tally.report(1, worst <= kMassTol,
               fmt("max |mass - 0.7| over %.0f time units = %.3e (tol %.0e)", phys.T_horizon,
                   worst, kMassTol));
}

// 2. Long-run PDE against the closed form, and the vanishing-gain limit.
void closed_form(Tally& tally) {
  const PhysicsConfig phys;
  OracleSettings s;
  s.particles = 0;
  const auto results = run_oracle_check(phys, default_oracle_cases(), s);
  double worst = 0.0;
  for (const auto& r : results) worst = std::max(worst, r.pde_vs_closed_form);

  const PeriodicGrid grid = phys.grid();
  const double uniform = phys.M_T / (2.0 * kPi);
  std::vector<double> skew(grid.size());
  for (int i = 0; i < grid.size(); ++i) skew[i] = uniform * (1.0 + 0.5 * std::cos(grid.node(i)));
  double worst_uniform = 0.0;
  for (const auto& herders : {std::vector<double>{-kPi / 2, kPi / 2}, {0.0, kPi}, {-1.0, 2.0}}) {
    const HerderConfiguration h{herders, phys.M_H};
    PdeSolver solver(DensityField(grid, skew), phys.pde());
    solver.run_fixed(h, 1e-9, s.long_horizon, phys.kernel());
    const auto closed = steady_state_density(h, 1e-9, grid, phys.steady_state());
    for (int i = 0; i < grid.size(); ++i) {
      worst_uniform = std::max(worst_uniform, std::abs(solver.density()[i] - uniform));
      worst_uniform = std::max(worst_uniform, std::abs(closed[i] - uniform));
    }
  }
  tally.report(2, worst <= kClosedFormTol && worst_uniform <= kUniformTol,
               fmt("max L2(PDE, closed form) over 9 cases = %.3e (tol %.0e); "
                   "K->0 max |rho - 0.7/2pi| = %.3e (tol %.0e)",
                   worst, kClosedFormTol, worst_uniform, kUniformTol));
}

// 3. Particle ensemble against the PDE.
void micro_macro(Tally& tally) {
  const PhysicsConfig phys;
  const OracleSettings s;
  const std::vector<OracleCase> cases{{{-kPi / 2, kPi / 2}, 1.0}, {{-1.0, 2.0}, 2.0}};
  std::vector<double> gaps(cases.size());
  parallel_for(static_cast<int>(cases.size()), 0, [&](int i) {
    gaps[i] = micro_macro_gap(phys, cases[i], s.match_time, s.particles, s.bins, s.seed + i);
  });
  const double worst = *std::max_element(gaps.begin(), gaps.end());
  tally.report(3, worst <= kParticleTol,
               fmt("%d particles vs PDE at t=%.0f: max L2 = %.4f over %zu cases (tol %.2f)",
                   s.particles, s.match_time, worst, cases.size(), kParticleTol));
}

// 4. Kernel identities.
void kernel_identities(Tally& tally) {
  bool odd = true;
  bool repulsive = true;
  for (double x = 1e-7; x <= kPi; x += 0.00731) {
    odd = odd && kernel_eval(-x) == -kernel_eval(x);
    repulsive = repulsive && kernel_eval(x) > 0.0 && kernel_eval(-x) < 0.0;
  }
  const double at_pi = kernel_eval(kPi);
  double worst = 0.0;
  for (double x = 0.01; x <= kPi; x += 0.01) {
    const double numeric = oracle::simpson(
        [](double s) { return s == 0.0 ? 1.0 : oracle::kernel(s); }, 0.0, x, 4000);
    worst = std::max(worst, std::abs(kernel_antiderivative(x) - numeric));
    worst = std::max(worst, std::abs(kernel_antiderivative(-x) - numeric));
  }
  tally.report(4,
               odd && repulsive && std::abs(at_pi) < 1e-15 && worst <= kAntiderivativeTol,
               fmt("odd=%d repulsive=%d f(pi)=%.1e antiderivative max err=%.2e (tol %.0e)", odd,
                   repulsive, at_pi, worst, kAntiderivativeTol));
}

// 5. Backprop and gain gradients against finite differences.
void gradients(Tally& tally) {
  ppo::NetworkSpec spec;
  spec.hidden = {8, 8};
  auto net = ppo::PolicyNetwork::initialized(spec, 31);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < net.parameter_count(); ++i) net.parameters()[i] += noise(rng);
  auto random = [&](int rows, int cols) {
    ppo::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  const ppo::Matrix obs = random(4, 6);
  const ppo::Matrix w_mean = random(2, 6);
  const ppo::Matrix w_value = random(1, 6);
  auto actor_loss = [&](const ppo::PolicyNetwork& n) {
    return (n.actor_forward(obs).mean.array() * w_mean.array()).sum();
  };
  auto critic_loss = [&](const ppo::PolicyNetwork& n) {
    return (n.value(obs).array() * w_value.array()).sum();
  };
  ppo::Vector grad = ppo::Vector::Zero(net.parameter_count());
  ppo::MlpLayout::Tape at, ct;
  net.actor_forward(obs, &at);
  net.value(obs, &ct);
  net.actor_backward(at, w_mean, grad);
  net.critic_backward(ct, w_value, grad);

  std::uniform_int_distribution<Eigen::Index> pick_actor(0, net.log_std_offset() - 1);
  std::uniform_int_distribution<Eigen::Index> pick_critic(net.actor_parameter_count(),
                                                          net.parameter_count() - 1);
  const double h = 1e-5;
  double worst_net = 0.0;
  for (int p = 0; p < 100; ++p) {
    const bool actor = p % 2 == 0;
    const Eigen::Index i = actor ? pick_actor(rng) : pick_critic(rng);
    auto plus = net, minus = net;
    plus.parameters()[i] += h;
    minus.parameters()[i] -= h;
    const double fd = actor ? (actor_loss(plus) - actor_loss(minus)) / (2 * h)
                            : (critic_loss(plus) - critic_loss(minus)) / (2 * h);
    const double rel = std::abs(fd - grad[i]) / std::max({1e-6, std::abs(fd), std::abs(grad[i])});
    worst_net = std::max(worst_net, rel);
  }

  const PhysicsConfig phys;
  const auto desired = phys.desired();
  double worst_gain = 0.0;
  for (const auto& herders : {std::vector<double>{-2.0, 2.0}, {-1.0, 2.0}, {0.3, 2.9}}) {
    const SteadyStateProfile profile(phys.grid(), {herders, phys.M_H}, phys.steady_state());
    for (double K : {0.5, 1.0, 1.7}) {
      const double d = 1e-3;
      auto e = [&](double k) { return profile.error(k, desired); };
      const double five = (-e(K + 2 * d) + 8 * e(K + d) - 8 * e(K - d) + e(K - 2 * d)) / (12 * d);
      worst_gain = std::max(worst_gain, std::abs(profile.error_gradient(K, desired) - five));
    }
  }
  tally.report(5, worst_net <= kGradientTol && worst_gain <= kGradientTol,
               fmt("network max rel err over 100 probes = %.2e; gain FD vs 5-point = %.2e "
                   "(tol %.0e)",
                   worst_net, worst_gain, kGradientTol));
}

// 6. Bandit learning and the identity-ratio surrogate.
void ppo_sanity(Tally& tally) {
  const auto bandit = testing_support::train_bandit(200, 1);

  const auto net = ppo::PolicyNetwork::initialized(ppo::NetworkSpec{}, 4);
  ppo::Rng rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ppo::RolloutBuffer batch;
  const int n = 256;
  for (int i = 0; i < n; ++i) {
    std::vector<double> obs(4);
    for (double& o : obs) o = u(rng);
    const auto out = net.actor_forward(obs);
    const std::vector<double> m(out.mean.data(), out.mean.data() + out.mean.size());
    const std::vector<double> ls(out.log_std.data(), out.log_std.data() + out.log_std.size());
    const auto s = ppo::sample_action(m, ls, ppo::ActionMode::kStochastic, rng);
    batch.push(obs, s.action, s.log_probability, u(rng), 0.0, false);
  }
  batch.advantages = batch.rewards;
  batch.returns = batch.rewards;
  ppo::normalize_advantages(batch.advantages);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const auto rep = ppo::evaluate_batch(net, batch, idx, ppo::PpoHyperparams{});
  tally.report(6,
               bandit.updates <= 200 && bandit.p_optimal >= kBanditTarget &&
                   std::abs(rep.surrogate) <= kSurrogateTol,
               fmt("bandit P(optimal) after %d updates = %.4f (need %.1f); identity surrogate = "
                   "%.1e",
                   bandit.updates, bandit.p_optimal, kBanditTarget, rep.surrogate));
}

void run_properties(Tally& tally) {
  const auto start = std::chrono::steady_clock::now();
  mass_conservation(tally);
  closed_form(tally);
  micro_macro(tally);
  kernel_identities(tally);
  gradients(tally);
  ppo_sanity(tally);
  std::printf("property suite wall time: %.1f s\n", elapsed(start));
}

void run_training(Tally& tally, const std::filesystem::path& out) {
  const ExperimentConfig cfg;
  std::filesystem::create_directories(out);
  {
    std::ofstream ini(out / "config.ini");
    ini << to_ini(cfg);
  }

  const auto start = std::chrono::steady_clock::now();
  const auto trained = train_policy(cfg, {out, 20, false});
  const double wall = elapsed(start);
  const Controller policy = policy_controller(trained.policy);

  const auto seeds = seed_range(cfg.eval.base_seed, cfg.eval.n_runs);
  RunSettings base;
  base.alpha = cfg.physics.alpha;
  base.initial_gain = cfg.env.gain_K;
  const auto eval = run_evaluation(policy, cfg, seeds, base);
  write_records_csv(out / "eval_runs.csv", eval);
  write_summary_json(out / "eval_summary.json", eval, cfg);

  // 7.
  const Summary err = summarize(eval.column(&RunRecord::e_T_ss));
  const double iqr = err.q3 - err.q1;
  tally.report(7, err.median >= kErrorLow && err.median <= kErrorHigh && iqr <= kIqrMax,
               fmt("median e_T_ss over %d seeds = %.4f (band [%.2f, %.2f]); IQR = %.4f (max %.2f)",
                   cfg.eval.n_runs, err.median, kErrorLow, kErrorHigh, iqr, kIqrMax));

  // 8.
  const double um = median(eval.column(&RunRecord::u_m));
  const double tau_h = median(eval.column(&RunRecord::tau_H));
  const double tau_t = median(eval.column(&RunRecord::tau_T));
  tally.report(8,
               um <= kEffortMax && tau_h <= kSettlingRatio * tau_t && tau_t <= kTargetSettlingMax,
               fmt("median u_m = %.4f (max %.1f); median tau_H = %.2f <= %.1f x median tau_T = "
                   "%.2f (max %.0f)",
                   um, kEffortMax, tau_h, kSettlingRatio, tau_t, kTargetSettlingMax));

  // 9.
  std::vector<AblationResult> ablations(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    ablations[i] = run_adaptive_ablation(policy, cfg, kAblationSwitch, seeds[i], cfg.physics.alpha,
                                         kAblationWindow);
  std::vector<double> reductions;
  for (const auto& a : ablations) reductions.push_back(a.reduction_at_window);
  write_ablation_csv(out / "ablation.csv", ablations.front());
  const double red = median(reductions);
  tally.report(9, red >= kAblationReduction,
               fmt("median error reduction %.0f time units after switching at t=%.0f = %.1f%% "
                   "(need %.0f%%)",
                   kAblationWindow, kAblationSwitch, 100 * red, 100 * kAblationReduction));

  // 10.
  const auto dist = run_disturbance_sweep(policy, cfg, {0.0, cfg.eval.vd_max}, seeds);
  write_records_csv(out / "disturbance_endpoints.csv", dist);
  std::vector<double> at0, atmax;
  for (const auto& r : dist.where(&RunRecord::disturbance_vd, 0.0)) at0.push_back(r.e_T_ss);
  for (const auto& r : dist.where(&RunRecord::disturbance_vd, cfg.eval.vd_max))
    atmax.push_back(r.e_T_ss);
  const double increase = median(atmax) / median(at0) - 1.0;
  tally.report(10,
               increase <= kDisturbanceIncrease &&
                   std::abs(median(atmax) - kDisturbanceAbsolute) <= kDisturbanceAbsoluteTol,
               fmt("median e_T_ss at v_d=%.1f = %.4f vs %.4f at 0: increase %.1f%% (max %.0f%%); "
                   "|value - %.3f| <= %.3f",
                   cfg.eval.vd_max, median(atmax), median(at0), 100 * increase,
                   100 * kDisturbanceIncrease, kDisturbanceAbsolute, kDisturbanceAbsoluteTol));

  // 11.
  const auto noise = run_noise_sweep(policy, cfg, {0.0, cfg.eval.Dm_max}, cfg.eval.noise_runs,
                                     cfg.eval.base_seed);
  write_records_csv(out / "noise_endpoints.csv", noise);
  std::vector<double> clean, noisy;
  for (const auto& r : noise.where(&RunRecord::noise_std_Dm, 0.0)) clean.push_back(r.e_T_ss);
  for (const auto& r : noise.where(&RunRecord::noise_std_Dm, cfg.eval.Dm_max))
    noisy.push_back(r.e_T_ss);
  tally.report(11, std::abs(mean(noisy) - mean(clean)) <= kNoiseTol,
               fmt("mean e_T_ss over %d runs at D_m=%.4f = %.4f vs %.4f at 0 (tol %.3f)",
                   cfg.eval.noise_runs, cfg.eval.Dm_max, mean(noisy), mean(clean), kNoiseTol));

  // 12.
  std::vector<double> smoothed;
  for (const auto& e : trained.episodes) smoothed.push_back(e.smoothed_reward);
  const std::size_t n = smoothed.size();
  auto decile_mean = [&](std::size_t d) {
    const auto lo = smoothed.begin() + static_cast<std::ptrdiff_t>(d * n / 10);
    const auto hi = smoothed.begin() + static_cast<std::ptrdiff_t>((d + 1) * n / 10);
    return std::accumulate(lo, hi, 0.0) / static_cast<double>(hi - lo);
  };
  bool pass12 = n >= 10;
  std::string detail12 = "too few episodes";
  if (n >= 10) {
    const double first = decile_mean(0);
    const double last = decile_mean(9);
    const double previous = decile_mean(8);
    const double final_value = smoothed.back();
    const double gain = last - first;
    const bool plateau = gain > 0.0 && std::abs(last - previous) <= kPlateauFraction * gain;
    pass12 = final_value > first && plateau && wall <= kTrainingWallMax;
    detail12 = fmt("smoothed reward first decile %.2f -> final %.2f; last two deciles %.2f, %.2f "
                   "(plateau within %.0f%% of gain); training %.0f s (max %.0f)",
                   first, final_value, previous, last, 100 * kPlateauFraction, wall,
                   kTrainingWallMax);
  }
  tally.report(12, pass12, detail12);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string group = "all";
  std::filesystem::path out = "acceptance_run";
  app.add_option("--group", group, "properties, training or all")
      ->check(CLI::IsMember({"properties", "training", "all"}));
  app.add_option("--output", out, "directory for training artifacts");
  CLI11_PARSE(app, argc, argv);

  Tally tally;
  try {
    if (group != "training") run_properties(tally);
    if (group != "properties") run_training(tally, out);
  } catch (const std::exception& e) {
    std::printf("FAIL error: %s\n", e.what());
    return 2;
  }
  if (group != "properties") {
    std::filesystem::create_directories(out);
    std::ofstream(out / "acceptance.json") << tally.results.dump(2) << '\n';
  }
  return tally.failed == 0 ? 0 : 1;
}
