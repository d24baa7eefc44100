#pragma once

#include <span>
#include <vector>

#include "shepherd/geometry.hpp"

namespace shepherd {

struct KernelParams {
  double length_L = kPi;
  /// Width of the tanh that replaces sgn(x). Zero keeps the exact sign.
  double smoothing_eps = 0.0;

  void validate() const;
};

/// Point herders and the total mass they represent in the mean-field picture.
struct HerderConfiguration {
  std::vector<double> positions;
  double mass_MH = 0.3;

  int count() const { return static_cast<int>(positions.size()); }
  /// Returns a copy with every position wrapped into (-pi, pi].
  HerderConfiguration wrapped() const;
  /// Returns a copy with every position shifted by delta (and wrapped).
  HerderConfiguration rotated(double delta) const;
};

/// Repulsive periodic interaction kernel
///   f(x) = sgn(x) / (e^{2pi/L} - 1) * (e^{(2pi - |x|)/L} - e^{|x|/L}).
double kernel_eval(double x, const KernelParams& params = {});

/// Even antiderivative of the unsmoothed kernel with F(0) = 0. Its periodic
/// extension is continuous, so F(wrap(b - h)) - F(wrap(a - h)) integrates
/// f(wrap(xi - h)) over [a, b] exactly.
double kernel_antiderivative(double x, const KernelParams& params = {});

/// Velocity at each node induced by the herders:
///   V[i] = K * (M_H / N) * sum_j f(wrap(x_i - H_j)).
std::vector<double> velocity_field(const PeriodicGrid& grid, const HerderConfiguration& herders,
                                   double gain_K, const KernelParams& params = {});

/// sum_j F(wrap(x_i - H_j)) at each node. Only defined for the exact kernel.
std::vector<double> kernel_potential(const PeriodicGrid& grid, std::span<const double> positions,
                                     const KernelParams& params = {});

/// Velocity on the cell faces x_{i+1/2} used by the finite-volume solver.
/// For the exact kernel this is the cell average of the velocity over
/// [x_i, x_{i+1}], computed from the antiderivative, which keeps the kernel
/// jump under each herder from leaking a spurious net circulation. With
/// smoothing enabled it is the mean of the two nodal velocities.
std::vector<double> face_velocity(const PeriodicGrid& grid, const HerderConfiguration& herders,
                                  double gain_K, const KernelParams& params = {});

}  // namespace shepherd
