#include <stdexcept>

#include "doctest.h"
#include "shepherd/config.hpp"

using namespace shepherd;

TEST_CASE("defaults match the reference scenario") {
  const ExperimentConfig c;
  CHECK(c.physics.n_nodes == 250);
  CHECK(c.physics.dt == 0.01);
  CHECK(c.physics.dt_pde == 0.0005);
  CHECK(c.physics.T_horizon == 150.0);
  CHECK(c.physics.n_herders == 2);
  CHECK(c.physics.D == 0.05);
  CHECK(c.physics.L == doctest::Approx(kPi));
  CHECK(c.physics.kappa == doctest::Approx(16.0 / (kPi * kPi)));
  CHECK(c.physics.v_max == 3.0);
  CHECK(c.physics.M_H == 0.3);
  CHECK(c.physics.M_T == 0.7);
  CHECK(c.physics.alpha == 0.2);
  CHECK(c.physics.horizon_steps() == 15000);
  CHECK(c.ppo.learning_rate == 3e-4);
  CHECK(c.ppo.rollout_length == 2048);
  CHECK(c.env.reward_k1 == 10.0);
  CHECK(c.env.reward_k2 == 0.01);
}

TEST_CASE("ini round trip") {
  ExperimentConfig c;
  c.physics.D = 0.07;
  c.physics.scheme = FluxScheme::kUpwind;
  c.env.reward_mode = RewardMode::kFullDensity;
  c.ppo.total_env_steps = 12345;
  c.ppo.anneal_lr = false;
  c.eval.noise_runs = 7;
  c.hidden_width = 32;
  const auto back = parse_config(to_ini(c));
  CHECK(to_ini(back) == to_ini(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(back).size() == 16);
  CHECK(config_hash(ExperimentConfig{}) != config_hash(c));
}

TEST_CASE("parsing table names and sections") {
  const auto c = parse_config(
      "; comment\n"
      "dx_nodes = 100\n"
      "N_herders = 3\n"
      "T_horizon = 20\n"
      "[env]\n"
      "episode_steps = 50\n"
      "reward_mode = full-density\n"
      "[ppo]\n"
      "learning_rate = 1e-3\n"
      "[eval]\n"
      "n_runs = 4\n");
  CHECK(c.physics.n_nodes == 100);
  CHECK(c.physics.n_herders == 3);
  CHECK(c.physics.T_horizon == 20.0);
  CHECK(c.env.episode_steps == 50);
  CHECK(c.env.reward_mode == RewardMode::kFullDensity);
  CHECK(c.ppo.learning_rate == 1e-3);
  CHECK(c.eval.n_runs == 4);
  CHECK(c.network_spec().observation_dim == 6);
  CHECK(c.network_spec().action_dim == 3);
}

TEST_CASE("bad configuration is rejected") {
  CHECK_THROWS(parse_config("no_such_key = 1\n"));
  CHECK_THROWS(parse_config("[ppo]\nbogus = 2\n"));
  CHECK_THROWS(parse_config("D = abc\n"));
  CHECK_THROWS(parse_config("D = -1\n"));
  CHECK_THROWS(parse_config("dx_nodes = 2.5\n"));
}

TEST_CASE("overrides") {
  ExperimentConfig c;
  apply_override(c, "alpha=0");
  apply_override(c, "ppo.seed = 17");
  apply_override(c, "env.noise_std_Dm=0.5");
  CHECK(c.physics.alpha == 0.0);
  CHECK(c.ppo.seed == 17);
  CHECK(c.env.noise_std_Dm == 0.5);
  CHECK_THROWS(apply_override(c, "alpha"));
  CHECK_THROWS(apply_override(c, "eval.nothing=1"));
}
