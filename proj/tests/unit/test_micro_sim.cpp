#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "shepherd/micro_sim.hpp"

using namespace shepherd;

TEST_CASE("herder step") {
  HerderState s{{0.1, -2.0}, {0.0, 0.0}, 3.0};
  SUBCASE("zero action keeps positions") {
    const auto next = herder_step(s, std::vector<double>{0.0, 0.0}, 0.0, 0.01);
    CHECK(next.positions == s.positions);
  }
  SUBCASE("wraps across +pi") {
    HerderState edge{{kPi - 0.01}, {0.0}, 3.0};
    const auto next = herder_step(edge, std::vector<double>{3.0}, 0.0, 0.01);
    CHECK(next.positions[0] == doctest::Approx(-kPi + 0.02).epsilon(1e-12));
  }
  SUBCASE("disturbance drifts every herder") {
    const auto next = herder_step(s, std::vector<double>{0.0, 0.0}, 0.6, 0.01);
    CHECK(next.positions[0] - s.positions[0] == doctest::Approx(0.006));
    CHECK(next.positions[1] - s.positions[1] == doctest::Approx(0.006));
  }
  SUBCASE("actions are clipped before the disturbance") {
    const auto next = herder_step(s, std::vector<double>{10.0, -10.0}, 0.5, 0.01);
    CHECK(next.last_actions[0] == 3.0);
    CHECK(next.last_actions[1] == -3.0);
    CHECK(next.positions[0] == doctest::Approx(0.1 + 0.035));
    CHECK(next.positions[1] == doctest::Approx(-2.0 - 0.025));
  }
  SUBCASE("bad actions") {
    CHECK_THROWS_AS(herder_step(s, std::vector<double>{0.0}, 0.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(
        herder_step(s, std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0.0}, 0.0, 0.01),
        std::invalid_argument);
  }
}

TEST_CASE("target sde step") {
  Rng rng(1);
  SUBCASE("no noise, no herders") {
    TargetEnsemble e{{0.3, -1.0, 2.5}, 0.0, 0.3};
    const auto next = target_sde_step(e, std::vector<double>{}, 1.0, 0.01, rng);
    CHECK(next.positions == e.positions);
  }
  SUBCASE("targets are repelled") {
    TargetEnsemble e{{0.5, -0.5}, 0.0, 0.3};
    const auto next = target_sde_step(e, std::vector<double>{0.0}, 1.0, 0.01, rng);
    CHECK(next.positions[0] > 0.5);
    CHECK(next.positions[1] < -0.5);
  }
  SUBCASE("drift normalization") {
    TargetEnsemble e{std::vector<double>(8, 0.0), 0.05, 0.3};
    CHECK(e.drift_scale(2) == doctest::Approx(0.15));
    e.normalization = DriftNormalization::kAgentCount;
    CHECK(e.drift_scale(2) == doctest::Approx(0.1));
  }
  SUBCASE("diffusion variance") {
    TargetEnsemble e{std::vector<double>(20000, 0.0), 0.05, 0.3};
    const auto next = target_sde_step(e, std::vector<double>{}, 1.0, 0.01, rng);
    double var = 0.0;
    for (double x : next.positions) var += x * x;
    var /= next.positions.size();
    // 2 D dt = 0.001, standard error of the variance ~ 0.001 * sqrt(2 / n)
    CHECK(var == doctest::Approx(0.001).epsilon(0.05));
  }
}

TEST_CASE("empirical density") {
  const PeriodicGrid grid;
  SUBCASE("spike") {
    const std::vector<double> pts(100, grid.node(0));
    const auto d = empirical_density(pts, grid, 0.7);
    CHECK(d[0] * grid.dx() == doctest::Approx(0.7));
    CHECK(integrate(d) == doctest::Approx(0.7));
    for (int i = 1; i < grid.size(); ++i) CHECK(d[i] == 0.0);
  }
  SUBCASE("point at +pi lands on node 0") {
    const auto d = empirical_density(std::vector<double>{kPi}, grid, 1.0);
    CHECK(d[0] > 0.0);
  }
  SUBCASE("uniform particles") {
    Rng rng(5);
    const auto e = uniform_ensemble(250000, rng);
    const auto d = empirical_density(e.positions, grid, 0.7);
    const double per_cell = 250000.0 / grid.size();
    const double u = 0.7 / (2 * kPi);
    for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(d[i] / u - 1.0) < 5.0 / std::sqrt(per_cell));
  }
}

TEST_CASE("coarsen preserves mass and constants") {
  const PeriodicGrid grid;
  DensityField d(grid, 0.0);
  for (int i = 0; i < grid.size(); ++i) d[i] = 1.0 + std::sin(grid.node(i));
  for (int factor : {1, 2, 5, 10}) {
    const auto c = coarsen(d, factor);
    CHECK(c.size() == grid.size() / factor);
    CHECK(integrate(c) == doctest::Approx(integrate(d)).epsilon(1e-12));
  }
  const auto flat = coarsen(DensityField(grid, 0.3), 5);
  for (int i = 0; i < flat.size(); ++i) CHECK(flat[i] == doctest::Approx(0.3));
  CHECK_THROWS(coarsen(d, 3));
}
