// Command-line front end: training, evaluation, sweeps and fixed-herder
// simulations. Every run writes CSV files plus a JSON summary into --output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shepherd/config.hpp"
#include "shepherd/experiments.hpp"
#include "shepherd/ppo/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace shepherd;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output = "out";
  std::optional<int> threads;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.threads) cfg.eval.threads = *c.threads;
  cfg.validate();
  return cfg;
}

fs::path prepare_output(const Common& c, const ExperimentConfig& cfg) {
  fs::path dir(c.output);
  fs::create_directories(dir);
  std::ofstream(dir / "config.ini") << to_ini(cfg);
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

Controller load_controller(const std::string& checkpoint, const ExperimentConfig& cfg) {
  return policy_controller(ppo::load_checkpoint(checkpoint, cfg.network_spec()));
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.overrides, "Override a config key (key=value or section.key=value)");
  cmd->add_option("-o,--output", c.output, "Output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

void print_summary(const std::string& label, const Summary& s) {
  std::printf("%-8s median %.5f  q1 %.5f  q3 %.5f  p10 %.5f  p90 %.5f  mean %.5f\n",
              label.c_str(), s.median, s.q1, s.q3, s.p10, s.p90, s.mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density shepherding with PPO herders"};
  app.require_subcommand(1);
  Common common;

  // train
  auto* train = app.add_subcommand("train", "Train a policy");
  add_common(train, common);
  std::optional<long long> total_steps;
  std::optional<std::uint64_t> train_seed;
  bool verbose = false;
  train->add_option("--total-steps", total_steps, "Overrides ppo.total_env_steps");
  train->add_option("--seed", train_seed, "Overrides ppo.seed");
  train->add_flag("-v,--verbose", verbose, "Print progress");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over several seeds");
  add_common(eval, common);
  std::string checkpoint;
  std::optional<int> runs;
  std::optional<std::uint64_t> base_seed;
  std::optional<double> alpha;
  eval->add_option("checkpoint", checkpoint, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--runs", runs, "Overrides eval.n_runs");
  eval->add_option("--base-seed", base_seed, "Overrides eval.base_seed");
  eval->add_option("--alpha", alpha, "Overrides alpha");

  // ablate-gain
  auto* ablate = app.add_subcommand("ablate-gain", "Freeze K = 1, then switch adaptation on");
  add_common(ablate, common);
  std::optional<double> switch_time;
  std::uint64_t ablation_seed = 0;
  bool ablation_seed_set = false;
  ablate->add_option("checkpoint", checkpoint, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  ablate->add_option("--switch-time", switch_time, "Overrides eval.switch_time");
  ablate->add_option("--seed", ablation_seed, "Initial-condition seed (default eval.base_seed)")
      ->each([&](const std::string&) { ablation_seed_set = true; });
  ablate->add_option("--alpha", alpha, "Overrides alpha");

  // sweeps
  auto* sweep_d = app.add_subcommand("sweep-disturbance", "Evaluate under constant drift v_d");
  add_common(sweep_d, common);
  std::optional<int> points;
  std::optional<double> max_value;
  sweep_d->add_option("checkpoint", checkpoint, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  sweep_d->add_option("--points", points, "Overrides eval.sweep_points");
  sweep_d->add_option("--vd-max", max_value, "Overrides eval.vd_max");
  sweep_d->add_option("--runs", runs, "Overrides eval.n_runs");
  sweep_d->add_option("--alpha", alpha, "Overrides alpha");

  auto* sweep_n = app.add_subcommand("sweep-noise", "Evaluate under observation noise D_m");
  add_common(sweep_n, common);
  sweep_n->add_option("checkpoint", checkpoint, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  sweep_n->add_option("--points", points, "Overrides eval.sweep_points");
  sweep_n->add_option("--dm-max", max_value, "Overrides eval.Dm_max");
  sweep_n->add_option("--runs", runs, "Overrides eval.noise_runs");
  sweep_n->add_option("--alpha", alpha, "Overrides alpha");

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "Compare the PDE with its closed form and with particles");
  add_common(oracle, common);
  std::optional<double> horizon, match_time;
  std::optional<int> particles;
  oracle->add_option("--horizon", horizon, "Overrides eval.oracle_horizon");
  oracle->add_option("--particles", particles, "Overrides eval.oracle_particles (0 skips)");
  oracle->add_option("--match-time", match_time, "Overrides eval.oracle_match_time");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "PDE under fixed herders; density snapshots");
  add_common(simulate, common);
  std::string herders_text;
  double gain = 1.0;
  double t_end = 150.0;
  double interval = 1.0;
  simulate->add_option("--herders", herders_text, "Comma-separated herder positions")->required();
  simulate->add_option("--gain", gain, "Interaction gain K")->capture_default_str();
  simulate->add_option("--t-end", t_end, "Final time")->capture_default_str();
  simulate->add_option("--interval", interval, "Snapshot interval")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load(common);
    if (total_steps) cfg.ppo.total_env_steps = *total_steps;
    if (train_seed) cfg.ppo.seed = *train_seed;
    if (runs && !sweep_n->parsed()) cfg.eval.n_runs = *runs;
    if (runs && sweep_n->parsed()) cfg.eval.noise_runs = *runs;
    if (base_seed) cfg.eval.base_seed = *base_seed;
    if (alpha) cfg.physics.alpha = *alpha;
    if (switch_time) cfg.eval.switch_time = *switch_time;
    if (points) cfg.eval.sweep_points = *points;
    if (max_value && sweep_d->parsed()) cfg.eval.vd_max = *max_value;
    if (max_value && sweep_n->parsed()) cfg.eval.Dm_max = *max_value;
    if (horizon) cfg.eval.oracle_horizon = *horizon;
    if (particles) cfg.eval.oracle_particles = *particles;
    if (match_time) cfg.eval.oracle_match_time = *match_time;
    cfg.validate();
    const fs::path out = prepare_output(common, cfg);

    if (train->parsed()) {
      ppo::TrainOptions options;
      options.output_dir = out;
      options.verbose = verbose;
      const auto result = train_policy(cfg, options);
      json doc;
      doc["config_hash"] = config_hash(cfg);
      doc["wall_seconds"] = result.wall_seconds;
      doc["episodes"] = result.episodes.size();
      doc["updates"] = result.updates.size();
      if (!result.episodes.empty())
        doc["final_smoothed_reward"] = result.episodes.back().smoothed_reward;
      doc["checkpoint"] = (out / "policy.txt").string();
      write_json(out / "train_summary.json", doc);
      std::printf("trained %zu episodes in %.1f s -> %s\n", result.episodes.size(),
                  result.wall_seconds, (out / "policy.txt").c_str());
    } else if (eval->parsed()) {
      const auto controller = load_controller(checkpoint, cfg);
      RunSettings settings;
      settings.alpha = cfg.physics.alpha;
      settings.initial_gain = cfg.env.gain_K;
      const auto seeds = seed_range(cfg.eval.base_seed, cfg.eval.n_runs);
      const auto report = run_evaluation(controller, cfg, seeds, settings);
      write_records_csv(out / "eval_runs.csv", report);
      write_summary_json(out / "eval_summary.json", report, cfg);
      const auto trace = run_closed_loop(controller, cfg.physics, settings, seeds.front());
      write_trace_csv(out / "eval_trace.csv", trace);
      print_summary("e_T_ss", summarize(report.column(&RunRecord::e_T_ss)));
      print_summary("u_m", summarize(report.column(&RunRecord::u_m)));
      print_summary("tau_H", summarize(report.column(&RunRecord::tau_H)));
      print_summary("tau_T", summarize(report.column(&RunRecord::tau_T)));
    } else if (ablate->parsed()) {
      const auto controller = load_controller(checkpoint, cfg);
      const std::uint64_t seed = ablation_seed_set ? ablation_seed : cfg.eval.base_seed;
      const auto result =
          run_adaptive_ablation(controller, cfg, cfg.eval.switch_time, seed, cfg.physics.alpha);
      write_ablation_csv(out / "ablation.csv", result);
      json doc{{"seed", seed},
               {"config_hash", config_hash(cfg)},
               {"switch_time", result.switch_time},
               {"error_at_switch", result.error_at_switch},
               {"window", result.window},
               {"reduction_at_window", result.reduction_at_window},
               {"max_reduction", result.max_reduction},
               {"time_to_95pct", result.time_to_95pct},
               {"final_error_adaptive", result.adaptive.error.back()},
               {"final_error_fixed", result.fixed.error.back()},
               {"final_K", result.adaptive.gain.back()}};
      write_json(out / "ablation.json", doc);
      std::printf("error at switch %.5f, reduction after %.0f: %.1f%% (max %.1f%%, 95%% at +%.2f)\n",
                  result.error_at_switch, result.window, 100 * result.reduction_at_window,
                  100 * result.max_reduction, result.time_to_95pct);
    } else if (sweep_d->parsed()) {
      const auto controller = load_controller(checkpoint, cfg);
      const auto values = linspace(cfg.eval.vd_max, cfg.eval.sweep_points);
      const auto report = run_disturbance_sweep(controller, cfg, values,
                                                seed_range(cfg.eval.base_seed, cfg.eval.n_runs));
      write_records_csv(out / "disturbance_sweep.csv", report);
      write_summary_json(out / "disturbance_summary.json", report, cfg);
      for (double v : values)
        print_summary("vd=" + std::to_string(v).substr(0, 5),
                      summarize(ExperimentReport{"", report.where(&RunRecord::disturbance_vd, v)}
                                    .column(&RunRecord::e_T_ss)));
    } else if (sweep_n->parsed()) {
      const auto controller = load_controller(checkpoint, cfg);
      const auto values = linspace(cfg.eval.Dm_max, cfg.eval.sweep_points);
      const auto report =
          run_noise_sweep(controller, cfg, values, cfg.eval.noise_runs, cfg.eval.base_seed);
      write_records_csv(out / "noise_sweep.csv", report);
      write_summary_json(out / "noise_summary.json", report, cfg);
      for (double v : values)
        print_summary("Dm=" + std::to_string(v).substr(0, 5),
                      summarize(ExperimentReport{"", report.where(&RunRecord::noise_std_Dm, v)}
                                    .column(&RunRecord::e_T_ss)));
    } else if (oracle->parsed()) {
      OracleSettings settings;
      settings.long_horizon = cfg.eval.oracle_horizon;
      settings.particles = cfg.eval.oracle_particles;
      settings.match_time = cfg.eval.oracle_match_time;
      const auto results =
          run_oracle_check(cfg.physics, default_oracle_cases(), settings, cfg.eval.threads);
      write_oracle_csv(out / "oracle.csv", results);
      json list = json::array();
      for (const auto& r : results) {
        list.push_back({{"herders", r.config.herders},
                        {"K", r.config.gain_K},
                        {"pde_vs_closed_form", r.pde_vs_closed_form},
                        {"sde_vs_pde", r.sde_vs_pde},
                        {"pde_mass_error", r.pde_mass_error}});
        std::printf("herders %-24s K %.2f  pde/closed %.3e  sde/pde %.4f\n",
                    list.back()["herders"].dump().c_str(), r.config.gain_K,
                    r.pde_vs_closed_form, r.sde_vs_pde);
      }
      write_json(out / "oracle_summary.json",
                 {{"config_hash", config_hash(cfg)}, {"cases", list}});
    } else if (simulate->parsed()) {
      const OracleCase c{parse_list(herders_text), gain};
      if (static_cast<int>(c.herders.size()) < 1) throw std::invalid_argument("no herders given");
      const auto snaps = simulate_fixed(cfg.physics, c, t_end, interval);
      write_snapshots_csv(out / "density_snapshots.csv", snaps.times, snaps.rows);
      const DensityField last(cfg.physics.grid(), snaps.rows.back());
      const DensityField desired = cfg.physics.desired();
      write_json(out / "simulate_summary.json",
                 {{"herders", c.herders},
                  {"K", c.gain_K},
                  {"t_end", t_end},
                  {"snapshots", snaps.times.size()},
                  {"final_error", l2_norm(desired, last)},
                  {"final_mass", integrate(last)}});
      std::printf("wrote %zu snapshots to %s\n", snaps.times.size(),
                  (out / "density_snapshots.csv").c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
