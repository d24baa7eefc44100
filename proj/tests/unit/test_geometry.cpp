#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "shepherd/geometry.hpp"
#include "shepherd/steady_state.hpp"

using namespace shepherd;

TEST_CASE("wrap maps onto (-pi, pi]") {
  CHECK(wrap(0.0) == 0.0);
  CHECK(wrap(3 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap(-3.5 * kPi) == doctest::Approx(0.5 * kPi).epsilon(1e-14));
  CHECK(wrap(kPi) == kPi);
  CHECK(wrap(-kPi) == kPi);
  for (double x = -20.0; x < 20.0; x += 0.37) {
    const double w = wrap(x);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    const double turns = (x - w) / kTwoPi;
    CHECK(std::abs(turns - std::round(turns)) < 1e-12);
  }
  CHECK_THROWS_AS(wrap(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(wrap(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("wrapped signed distance") {
  CHECK(wrapped_signed_distance(0.5, 0.2) == doctest::Approx(0.3));
  CHECK(wrapped_signed_distance(3.0, -3.0) == doctest::Approx(6.0 - 2 * oracle::pi));
  CHECK(wrapped_signed_distance(-3.0, 3.0) == doctest::Approx(2 * oracle::pi - 6.0));
  CHECK(wrapped_signed_distance(1.234, 1.234) == 0.0);
}

TEST_CASE("grid layout") {
  const PeriodicGrid grid(250);
  CHECK(grid.size() == 250);
  CHECK(grid.dx() == doctest::Approx(2 * oracle::pi / 250));
  CHECK(grid.node(0) == doctest::Approx(-oracle::pi));
  CHECK(grid.node(125) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS(PeriodicGrid(2));
}

TEST_CASE("integrate and l2 norm") {
  const PeriodicGrid grid;
  CHECK(integrate(DensityField::uniform(grid, 0.7)) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(integrate(DensityField(grid, 0.0)) == 0.0);
  CHECK(integrate(desired_distribution(grid)) == doctest::Approx(0.7).epsilon(1e-12));

  const DensityField a(grid, 0.25);
  const DensityField zero(grid, 0.0);
  CHECK(l2_norm(a, a) == 0.0);
  CHECK(l2_norm(a, zero) == doctest::Approx(0.25 * std::sqrt(2 * oracle::pi)));
  CHECK_THROWS_AS(l2_norm(a, DensityField(PeriodicGrid(100), 0.0)), std::invalid_argument);
}

TEST_CASE("l2 distance of the von Mises target from uniform matches the analytic value") {
  // ||rho - u||^2 = int rho^2 - M^2 / (2 pi), with
  // int rho^2 = M^2 I0(2 kappa) / (2 pi I0(kappa)^2).
  const double kappa = 16.0 / (oracle::pi * oracle::pi);
  const double M = 0.7;
  const double i0 = std::cyl_bessel_i(0.0, kappa);
  const double exact =
      std::sqrt(M * M * std::cyl_bessel_i(0.0, 2 * kappa) / (2 * oracle::pi * i0 * i0) -
                M * M / (2 * oracle::pi));
  const PeriodicGrid grid;
  const double computed = l2_norm(desired_distribution(grid, kappa, M), DensityField::uniform(grid, M));
  CHECK(computed == doctest::Approx(exact).epsilon(1e-9));
  CHECK(computed > 0.0);

  // Same value on a 10000-node grid.
  const PeriodicGrid fine(10000);
  CHECK(l2_norm(desired_distribution(fine, kappa, M), DensityField::uniform(fine, M)) ==
        doctest::Approx(computed).epsilon(1e-9));
}

TEST_CASE("density field helpers") {
  const PeriodicGrid grid(10);
  DensityField f(grid, 0.0);
  for (int i = 0; i < 10; ++i) f[i] = i + 1.0;
  const DensityField r = f.rotated(3);
  for (int i = 0; i < 10; ++i) CHECK(r[(i + 3) % 10] == f[i]);
  CHECK(f.rotated(-3).rotated(3)[4] == f[4]);
  f.normalize(2.0);
  CHECK(integrate(f) == doctest::Approx(2.0));
  CHECK(f.min_value() == doctest::Approx(f[0]));
  DensityField z(grid, 0.0);
  CHECK_THROWS_AS(z.normalize(1.0), std::domain_error);
}
