#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "shepherd/experiments.hpp"

using namespace shepherd;

namespace {

ExperimentConfig short_config() {
  ExperimentConfig c;
  c.physics.T_horizon = 5.0;
  c.eval.threads = 2;
  return c;
}

// Proportional controller steering both herders towards +-2.
Controller park_controller() {
  return [](const std::vector<double>& obs) {
    std::vector<double> u;
    const double targets[2] = {-2.0, 2.0};
    for (std::size_t i = 0; i < 2; ++i) {
      const double h = std::atan2(obs[2 * i + 1], obs[2 * i]);
      u.push_back(std::clamp(2.0 * wrapped_signed_distance(targets[i], h), -3.0, 3.0));
    }
    return u;
  };
}

}  // namespace

TEST_CASE("closed loop trace shapes") {
  const auto cfg = short_config();
  RunSettings s;
  s.snapshot_every = 100;
  const auto trace = run_closed_loop(park_controller(), cfg.physics, s, 3);
  CHECK(trace.times.size() == 501);
  CHECK(trace.actions.size() == 500);
  CHECK(trace.error.size() == 501);
  CHECK(trace.snapshots.size() == 6);
  CHECK(integrate(trace.final_density) == doctest::Approx(0.7).epsilon(1e-12));
  const auto rec = summarize_run(trace, cfg.physics, s, 3);
  CHECK(rec.tau_H >= 0.0);
  CHECK(rec.tau_H <= 5.0);
  CHECK(rec.tau_T <= 5.0);
  CHECK(rec.u_m > 0.0);
}

TEST_CASE("runs are reproducible and seeded") {
  const auto cfg = short_config();
  const auto a = run_closed_loop(park_controller(), cfg.physics, {}, 10);
  const auto b = run_closed_loop(park_controller(), cfg.physics, {}, 10);
  const auto c = run_closed_loop(park_controller(), cfg.physics, {}, 11);
  CHECK(a.error == b.error);
  CHECK(a.positions.front() != c.positions.front());
}

TEST_CASE("adaptation is frozen before the switch") {
  auto cfg = short_config();
  cfg.physics.T_horizon = 3.0;
  const auto res = run_adaptive_ablation(park_controller(), cfg, 1.5, 4, 0.2, 1.0);
  for (std::size_t k = 0; k <= 150; ++k) {
    CHECK(res.adaptive.gain[k] == 1.0);
    CHECK(res.adaptive.error[k] == res.fixed.error[k]);
  }
  CHECK(res.adaptive.gain.back() != 1.0);
  for (double K : res.fixed.gain) CHECK(K == 1.0);

  const auto off = run_adaptive_ablation(park_controller(), cfg, 1.5, 4, 0.0, 1.0);
  CHECK(off.adaptive.error == off.fixed.error);
}

TEST_CASE("sweeps produce every record in parameter order") {
  auto cfg = short_config();
  cfg.physics.T_horizon = 1.0;
  const auto vd = linspace(0.6, 3);
  CHECK(vd == std::vector<double>{0.0, 0.3, 0.6});
  const auto dist = run_disturbance_sweep(park_controller(), cfg, vd, seed_range(5, 2));
  REQUIRE(dist.records.size() == 6);
  CHECK(dist.records[2].disturbance_vd == 0.3);
  CHECK(dist.records[3].seed == 6);
  CHECK(dist.where(&RunRecord::disturbance_vd, 0.6).size() == 2);

  const auto noise = run_noise_sweep(park_controller(), cfg, {0.0, 1.0}, 3, 100);
  CHECK(noise.records.size() == 6);
  // Zero noise reproduces the plain evaluation.
  RunSettings s;
  s.alpha = cfg.physics.alpha;
  const auto base = run_evaluation(park_controller(), cfg, seed_range(100, 3), s);
  for (int i = 0; i < 3; ++i) CHECK(noise.records[i].e_T_ss == base.records[i].e_T_ss);
  CHECK(noise.records[3].e_T_ss != base.records[0].e_T_ss);
}

TEST_CASE("parallel and serial evaluation agree") {
  auto cfg = short_config();
  cfg.physics.T_horizon = 1.0;
  RunSettings s;
  cfg.eval.threads = 1;
  const auto serial = run_evaluation(park_controller(), cfg, seed_range(0, 4), s);
  cfg.eval.threads = 4;
  const auto parallel = run_evaluation(park_controller(), cfg, seed_range(0, 4), s);
  for (int i = 0; i < 4; ++i) {
    CHECK(serial.records[i].e_T_ss == parallel.records[i].e_T_ss);
    CHECK(serial.records[i].seed == parallel.records[i].seed);
  }
}

TEST_CASE("oracle check with vanishing gain is uniform") {
  PhysicsConfig phys;
  OracleSettings s;
  s.long_horizon = 50.0;
  s.particles = 0;
  const auto res = run_oracle_check(phys, {{{-1.0, 2.0}, 1e-9}}, s, 1);
  CHECK(res[0].pde_vs_closed_form < 1e-6);
  CHECK(res[0].sde_vs_pde < 0.0);
  CHECK(res[0].pde_mass_error < 1e-12);
}

TEST_CASE("outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "shepherd_exp_out";
  std::filesystem::remove_all(dir);
  auto cfg = short_config();
  cfg.physics.T_horizon = 0.5;
  const auto rep = run_evaluation(park_controller(), cfg, seed_range(1, 3), {});
  write_records_csv(dir / "runs.csv", rep);
  write_summary_json(dir / "summary.json", rep, cfg);
  std::ifstream csv(dir / "runs.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header ==
        "seed,disturbance_vd,noise_std_Dm,alpha,e_T_ss,u_m,tau_H,tau_T,final_K,effort_decay_time,"
        "config_hash");
  std::ifstream js(dir / "summary.json");
  const auto doc = nlohmann::json::parse(js);
  CHECK(doc["total_records"] == 3);
  CHECK(doc["groups"][0]["e_T_ss"]["count"] == 3);
  CHECK(doc["config_hash"] == config_hash(cfg));
  // The embedded configuration reproduces the hash.
  CHECK(config_hash(parse_config(doc["config"].get<std::string>())) == config_hash(cfg));

  const auto snaps = simulate_fixed(cfg.physics, {{0.0, 3.0}, 1.0}, 2.0, 0.5);
  CHECK(snaps.times.size() == 5);
  write_snapshots_csv(dir / "snaps.csv", snaps.times, snaps.rows);
  std::ifstream sc(dir / "snaps.csv");
  int lines = 0;
  for (std::string l; std::getline(sc, l);) ++lines;
  CHECK(lines == 6);
  std::filesystem::remove_all(dir);
}
