#include "shepherd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "shepherd/env.hpp"
#include "shepherd/micro_sim.hpp"
#include "shepherd/steady_state.hpp"

namespace shepherd {

namespace {

// Separate stream for measurement noise so that it never perturbs the
// initial-condition draw.
constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(10);
  return out;
}

std::vector<double> norms(const std::vector<std::vector<double>>& actions) {
  std::vector<double> out;
  out.reserve(actions.size());
  for (const auto& u : actions) {
    double sq = 0.0;
    for (double v : u) sq += v * v;
    out.push_back(std::sqrt(sq));
  }
  return out;
}

}  // namespace

ppo::EnvFactory shepherd_env_factory(const ExperimentConfig& cfg) {
  return [cfg](int env_index) -> std::unique_ptr<ppo::Environment> {
    EnvConfig env = cfg.env;
    env.rng_seed += static_cast<std::uint64_t>(env_index);
    return std::make_unique<ShepherdEnv>(cfg.physics, env);
  };
}

ppo::TrainResult train_policy(const ExperimentConfig& cfg, const ppo::TrainOptions& options) {
  cfg.validate();
  return ppo::train(shepherd_env_factory(cfg), cfg.ppo, cfg.network_spec(), options);
}

Controller policy_controller(const ppo::PolicyNetwork& net) {
  auto shared = std::make_shared<const ppo::PolicyNetwork>(net);
  return [shared](const std::vector<double>& obs) {
    const auto out = shared->actor_forward(obs);
    return std::vector<double>(out.mean.data(), out.mean.data() + out.mean.size());
  };
}

RunTrace run_closed_loop(const Controller& controller, const PhysicsConfig& physics,
                         const RunSettings& settings, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-kPi, kPi);
  std::vector<double> start(physics.n_herders);
  for (double& h : start) h = -uniform(rng);
  return run_closed_loop_from(controller, physics, settings, std::move(start), seed);
}

RunTrace run_closed_loop_from(const Controller& controller, const PhysicsConfig& physics,
                              const RunSettings& settings, std::vector<double> initial_positions,
                              std::uint64_t noise_seed) {
  physics.validate();
  if (static_cast<int>(initial_positions.size()) != physics.n_herders)
    throw std::invalid_argument("run_closed_loop: one initial position per herder required");
  if (!(settings.noise_std_Dm >= 0.0)) throw std::invalid_argument("noise std must be >= 0");

  const PeriodicGrid grid = physics.grid();
  const SteadyStateParams ss_params = physics.steady_state();
  const DensityField desired = physics.desired();
  const int steps = physics.horizon_steps();

  Rng noise_rng(noise_seed ^ kNoiseStream);
  std::normal_distribution<double> noise(0.0, settings.noise_std_Dm > 0.0 ? settings.noise_std_Dm
                                                                          : 1.0);

  HerderState herders;
  herders.v_max = physics.v_max;
  herders.positions = std::move(initial_positions);
  for (double& h : herders.positions) h = wrap(h);
  herders.last_actions.assign(physics.n_herders, 0.0);

  GainState gain{settings.initial_gain, settings.alpha, 0.01};
  PdeSolver solver(DensityField::uniform(grid, physics.M_T), physics.pde());

  RunTrace trace;
  trace.times.reserve(steps + 1);
  trace.error.reserve(steps + 1);
  trace.gain.reserve(steps + 1);
  trace.positions.reserve(steps + 1);
  trace.actions.reserve(steps);

  auto snapshot = [&](int k) {
    if (settings.snapshot_every > 0 && k % settings.snapshot_every == 0) {
      trace.snapshot_times.push_back(k * physics.dt);
      const auto v = solver.density().values();
      trace.snapshots.emplace_back(v.begin(), v.end());
    }
  };

  for (int k = 0; k <= steps; ++k) {
    const double t = k * physics.dt;
    trace.times.push_back(t);
    trace.error.push_back(l2_norm(desired, solver.density()));
    trace.gain.push_back(gain.K);
    trace.positions.push_back(herders.positions);
    snapshot(k);
    if (k == steps) break;

    std::vector<double> measured = herders.positions;
    if (settings.noise_std_Dm > 0.0)
      for (double& h : measured) h += noise(noise_rng);
    const std::vector<double> action = controller(encode_observation(measured));

    const SteadyStateProfile profile(grid, {herders.positions, physics.M_H}, ss_params);
    solver.advance_window(profile.face_velocity(gain.K));
    herders = herder_step(herders, action, settings.disturbance_vd, physics.dt);
    trace.actions.push_back(herders.last_actions);
    if (t >= settings.adapt_start - 1e-9 && settings.alpha > 0.0)
      gain = adapt_gain_step(gain, profile, desired, physics.dt);
  }
  trace.final_density = solver.density();
  return trace;
}

RunRecord summarize_run(const RunTrace& trace, const PhysicsConfig& physics,
                        const RunSettings& settings, std::uint64_t seed) {
  RunRecord r;
  r.seed = seed;
  r.disturbance_vd = settings.disturbance_vd;
  r.noise_std_Dm = settings.noise_std_Dm;
  r.alpha = settings.alpha;
  r.e_T_ss = trace.error.back();
  r.u_m = mean_control_effort(trace.actions, physics.dt, physics.T_horizon);
  r.tau_H = settling_time_herders(trace.positions, physics.dt);
  r.tau_T = settling_time_targets(trace.error, r.e_T_ss, physics.dt);
  r.final_K = trace.gain.back();
  const auto effort = norms(trace.actions);
  r.effort_decay_time = decay_time(effort, 0.01 * physics.v_max, physics.dt);
  return r;
}

std::vector<double> ExperimentReport::column(double RunRecord::*field) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

std::vector<RunRecord> ExperimentReport::where(double RunRecord::*param, double value) const {
  std::vector<RunRecord> out;
  for (const auto& r : records)
    if (std::abs(r.*param - value) <= 1e-12 * std::max(1.0, std::abs(value))) out.push_back(r);
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& task) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds(std::max(count, 0));
  for (int i = 0; i < count; ++i) seeds[i] = base + static_cast<std::uint64_t>(i);
  return seeds;
}

namespace {

struct Job {
  RunSettings settings;
  std::uint64_t seed;
};

std::vector<RunRecord> run_jobs(const Controller& controller, const ExperimentConfig& cfg,
                                const std::vector<Job>& jobs) {
  std::vector<RunRecord> out(jobs.size());
  const std::string hash = config_hash(cfg);
  parallel_for(static_cast<int>(jobs.size()), cfg.eval.threads, [&](int i) {
    const auto& job = jobs[i];
    const RunTrace trace = run_closed_loop(controller, cfg.physics, job.settings, job.seed);
    out[i] = summarize_run(trace, cfg.physics, job.settings, job.seed);
    out[i].config_hash = hash;
  });
  return out;
}

RunSettings eval_settings(const ExperimentConfig& cfg) {
  RunSettings s;
  s.alpha = cfg.physics.alpha;
  s.initial_gain = cfg.env.gain_K;
  return s;
}

}  // namespace

ExperimentReport run_evaluation(const Controller& controller, const ExperimentConfig& cfg,
                                const std::vector<std::uint64_t>& seeds,
                                const RunSettings& settings) {
  std::vector<Job> jobs;
  for (auto seed : seeds) jobs.push_back({settings, seed});
  return {"evaluation", run_jobs(controller, cfg, jobs)};
}

AblationResult run_adaptive_ablation(const Controller& controller, const ExperimentConfig& cfg,
                                     double switch_time, std::uint64_t seed, double alpha,
                                     double window) {
  if (!(switch_time >= 0.0) || switch_time > cfg.physics.T_horizon)
    throw std::invalid_argument("ablation: switch time outside the horizon");
  AblationResult result;
  result.switch_time = switch_time;
  result.window = window;

  RunSettings adaptive;
  adaptive.alpha = alpha;
  adaptive.adapt_start = switch_time;
  adaptive.initial_gain = 1.0;
  RunSettings fixed = adaptive;
  fixed.alpha = 0.0;

  std::vector<RunTrace*> targets{&result.adaptive, &result.fixed};
  std::vector<RunSettings> settings{adaptive, fixed};
  parallel_for(2, cfg.eval.threads, [&](int i) {
    *targets[i] = run_closed_loop(controller, cfg.physics, settings[i], seed);
  });

  const double dt = cfg.physics.dt;
  const auto& err = result.adaptive.error;
  const auto k_switch = static_cast<std::size_t>(std::llround(switch_time / dt));
  const auto k_window =
      std::min(err.size() - 1, static_cast<std::size_t>(std::llround((switch_time + window) / dt)));
  result.error_at_switch = err[k_switch];
  auto reduction = [&](std::size_t k) { return 1.0 - err[k] / result.error_at_switch; };
  result.reduction_at_window = reduction(k_window);
  for (std::size_t k = k_switch; k < err.size(); ++k)
    result.max_reduction = std::max(result.max_reduction, reduction(k));
  result.time_to_95pct = 0.0;
  if (result.max_reduction > 0.0) {
    for (std::size_t k = k_switch; k < err.size(); ++k) {
      if (reduction(k) >= 0.95 * result.max_reduction) {
        result.time_to_95pct = static_cast<double>(k - k_switch) * dt;
        break;
      }
    }
  }
  return result;
}

std::vector<double> linspace(double max, int points) {
  if (points < 1) throw std::invalid_argument("linspace: need at least one point");
  if (points == 1) return {0.0};
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = max * i / (points - 1);
  return v;
}

ExperimentReport run_disturbance_sweep(const Controller& controller, const ExperimentConfig& cfg,
                                       const std::vector<double>& vd_values,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<Job> jobs;
  for (double vd : vd_values) {
    for (auto seed : seeds) {
      RunSettings s = eval_settings(cfg);
      s.disturbance_vd = vd;
      jobs.push_back({s, seed});
    }
  }
  return {"disturbance_sweep", run_jobs(controller, cfg, jobs)};
}

ExperimentReport run_noise_sweep(const Controller& controller, const ExperimentConfig& cfg,
                                 const std::vector<double>& Dm_values, int runs_per_value,
                                 std::uint64_t base_seed) {
  std::vector<Job> jobs;
  const auto seeds = seed_range(base_seed, runs_per_value);
  for (double dm : Dm_values) {
    for (auto seed : seeds) {
      RunSettings s = eval_settings(cfg);
      s.noise_std_Dm = dm;
      jobs.push_back({s, seed});
    }
  }
  return {"noise_sweep", run_jobs(controller, cfg, jobs)};
}

std::vector<OracleCase> default_oracle_cases() {
  std::vector<OracleCase> cases;
  const std::vector<std::vector<double>> herders{{-kPi / 2, kPi / 2}, {0.0, kPi}, {-1.0, 2.0}};
  for (const auto& h : herders)
    for (double K : {0.5, 1.0, 2.0}) cases.push_back({h, K});
  return cases;
}

double micro_macro_gap(const PhysicsConfig& physics, const OracleCase& c, double match_time,
                       int particles, int bins, std::uint64_t seed) {
  const PeriodicGrid grid = physics.grid();
  if (bins <= 0 || grid.size() % bins != 0)
    throw std::invalid_argument("micro_macro_gap: bins must divide the node count");
  Rng rng(seed);
  TargetEnsemble ensemble = uniform_ensemble(particles, rng, physics.D, physics.M_H);
  const int steps = static_cast<int>(std::llround(match_time / physics.dt));
  for (int k = 0; k < steps; ++k)
    ensemble = target_sde_step(ensemble, c.herders, c.gain_K, physics.dt, rng);

  PdeSolver solver(DensityField::uniform(grid, physics.M_T), physics.pde());
  solver.run_fixed({c.herders, physics.M_H}, c.gain_K, match_time, physics.kernel());

  const int factor = grid.size() / bins;
  const DensityField micro = coarsen(empirical_density(ensemble.positions, grid, physics.M_T), factor);
  const DensityField macro = coarsen(solver.density(), factor);
  return l2_norm(micro, macro);
}

std::vector<OracleResult> run_oracle_check(const PhysicsConfig& physics,
                                           const std::vector<OracleCase>& cases,
                                           const OracleSettings& settings, int threads) {
  std::vector<OracleResult> results(cases.size());
  const PeriodicGrid grid = physics.grid();
  parallel_for(static_cast<int>(cases.size()), threads, [&](int i) {
    const auto& c = cases[i];
    OracleResult& r = results[i];
    r.config = c;
    const HerderConfiguration herders{c.herders, physics.M_H};
    PdeSolver solver(DensityField::uniform(grid, physics.M_T), physics.pde());
    solver.run_fixed(herders, c.gain_K, settings.long_horizon, physics.kernel());
    const DensityField closed =
        steady_state_density(herders, c.gain_K, grid, physics.steady_state());
    r.pde_vs_closed_form = l2_norm(solver.density(), closed);
    r.pde_mass_error = std::abs(integrate(solver.density()) - physics.M_T);
    if (settings.particles > 0)
      r.sde_vs_pde = micro_macro_gap(physics, c, settings.match_time, settings.particles,
                                     settings.bins, settings.seed + i);
  });
  return results;
}

Snapshots simulate_fixed(const PhysicsConfig& physics, const OracleCase& c, double t_end,
                         double snapshot_interval) {
  const PeriodicGrid grid = physics.grid();
  const int every = std::max(1, static_cast<int>(std::llround(snapshot_interval / physics.dt)));
  PdeSolver solver(DensityField::uniform(grid, physics.M_T), physics.pde());
  Snapshots out;
  auto keep = [&](double t, const DensityField& d) {
    out.times.push_back(t);
    out.rows.emplace_back(d.values().begin(), d.values().end());
  };
  keep(0.0, solver.density());
  int window = 0;
  solver.run_fixed({c.herders, physics.M_H}, c.gain_K, t_end, physics.kernel(),
                   [&](double t, const DensityField& d) {
                     if (++window % every == 0) keep(t, d);
                   });
  return out;
}

void write_records_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  auto out = open_output(path);
  out << "seed,disturbance_vd,noise_std_Dm,alpha,e_T_ss,u_m,tau_H,tau_T,final_K,"
         "effort_decay_time,config_hash\n";
  for (const auto& r : report.records) {
    out << r.seed << ',' << r.disturbance_vd << ',' << r.noise_std_Dm << ',' << r.alpha << ','
        << r.e_T_ss << ',' << r.u_m << ',' << r.tau_H << ',' << r.tau_T << ',' << r.final_K << ','
        << r.effort_decay_time << ',' << r.config_hash << '\n';
  }
}

namespace {

nlohmann::json to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean},     {"stddev", s.stddev}, {"min", s.min},
          {"p10", s.p10},     {"q1", s.q1},         {"median", s.median}, {"q3", s.q3},
          {"p90", s.p90},     {"max", s.max}};
}

}  // namespace

void write_summary_json(const std::filesystem::path& path, const ExperimentReport& report,
                        const ExperimentConfig& cfg) {
  std::map<std::pair<double, double>, std::vector<const RunRecord*>> groups;
  for (const auto& r : report.records) groups[{r.disturbance_vd, r.noise_std_Dm}].push_back(&r);

  const std::vector<std::pair<const char*, double RunRecord::*>> metrics{
      {"e_T_ss", &RunRecord::e_T_ss},   {"u_m", &RunRecord::u_m},
      {"tau_H", &RunRecord::tau_H},     {"tau_T", &RunRecord::tau_T},
      {"final_K", &RunRecord::final_K}, {"effort_decay_time", &RunRecord::effort_decay_time}};

  nlohmann::json doc;
  doc["experiment"] = report.name;
  doc["config_hash"] = config_hash(cfg);
  doc["config"] = to_ini(cfg);
  doc["total_records"] = report.records.size();
  nlohmann::json& list = doc["groups"] = nlohmann::json::array();
  for (const auto& [key, records] : groups) {
    nlohmann::json g;
    g["disturbance_vd"] = key.first;
    g["noise_std_Dm"] = key.second;
    std::vector<std::uint64_t> seeds;
    for (const auto* r : records) seeds.push_back(r->seed);
    g["seeds"] = seeds;
    for (const auto& [name, field] : metrics) {
      std::vector<double> values;
      for (const auto* r : records) values.push_back(r->*field);
      g[name] = to_json(summarize(values));
    }
    list.push_back(std::move(g));
  }
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  auto out = open_output(path);
  const std::size_t n_h = trace.positions.empty() ? 0 : trace.positions.front().size();
  out << "t,error_norm,K";
  for (std::size_t i = 0; i < n_h; ++i) out << ",H" << i + 1;
  for (std::size_t i = 0; i < n_h; ++i) out << ",u" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << trace.times[k] << ',' << trace.error[k] << ',' << trace.gain[k];
    for (double h : trace.positions[k]) out << ',' << h;
    for (std::size_t i = 0; i < n_h; ++i)
      out << ',' << (k < trace.actions.size() ? trace.actions[k][i] : 0.0);
    out << '\n';
  }
}

void write_ablation_csv(const std::filesystem::path& path, const AblationResult& result) {
  auto out = open_output(path);
  out << "t,error_adaptive,K_adaptive,error_fixed,K_fixed\n";
  for (std::size_t k = 0; k < result.adaptive.times.size(); ++k) {
    out << result.adaptive.times[k] << ',' << result.adaptive.error[k] << ','
        << result.adaptive.gain[k] << ',' << result.fixed.error[k] << ',' << result.fixed.gain[k]
        << '\n';
  }
}

void write_snapshots_csv(const std::filesystem::path& path, const std::vector<double>& times,
                         const std::vector<std::vector<double>>& rows) {
  auto out = open_output(path);
  if (rows.empty()) return;
  const PeriodicGrid grid(static_cast<int>(rows.front().size()));
  out << "t";
  for (int i = 0; i < grid.size(); ++i) out << ',' << grid.node(i);
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << times[r];
    for (double v : rows[r]) out << ',' << v;
    out << '\n';
  }
}

void write_oracle_csv(const std::filesystem::path& path, const std::vector<OracleResult>& results) {
  auto out = open_output(path);
  out << "herders,K,pde_vs_closed_form,sde_vs_pde,pde_mass_error\n";
  for (const auto& r : results) {
    out << '"';
    for (std::size_t i = 0; i < r.config.herders.size(); ++i)
      out << (i ? " " : "") << r.config.herders[i];
    out << '"' << ',' << r.config.gain_K << ',' << r.pde_vs_closed_form << ',' << r.sde_vs_pde
        << ',' << r.pde_mass_error << '\n';
  }
}

}  // namespace shepherd
