#pragma once

#include <vector>

#include "shepherd/fokker_planck.hpp"
#include "shepherd/geometry.hpp"
#include "shepherd/interaction.hpp"

namespace shepherd {

inline constexpr double kDefaultKappa = 16.0 / (kPi * kPi);

/// Physical constants the closed-form stationary density depends on.
struct SteadyStateParams {
  double diffusion_D = 0.05;
  double mass_MT = 0.7;
  KernelParams kernel{};
};

/// Interaction gain and the parameters of its gradient-descent adaptation.
struct GainState {
  double K = 1.0;
  double alpha = 0.2;
  double K_min = 0.01;
};

/// Half-width of the central difference used for d error / dK.
inline constexpr double kGainFdStep = 1e-3;

/// Von Mises density with concentration kappa, normalized on the grid so that
/// integrate(result) == mass_MT.
DensityField desired_distribution(const PeriodicGrid& grid, double kappa = kDefaultKappa,
                                  double mass_MT = 0.7);

/// Stationary solution of the target Fokker-Planck equation for frozen
/// herders. The log-density is linear in the gain, so the profile is computed
/// once per herder configuration and re-exponentiated for each K.
class SteadyStateProfile {
 public:
  SteadyStateProfile(const PeriodicGrid& grid, const HerderConfiguration& herders,
                     const SteadyStateParams& params = {});

  /// Cumulative drift integral from -pi for K = 1 (the exponent before the
  /// normalization constant).
  const std::vector<double>& log_profile() const { return log_profile_; }

  /// Increment of the log-profile across the last cell, from node n-1 back
  /// to node 0 at +pi.
  double closing_step() const { return closing_step_; }
  /// Net change of the log-profile around the full circle. Zero for the
  /// exact kernel; a small quadrature residue when smoothing is enabled.
  double periodic_mismatch() const;

  /// Face velocities of the PDE for this configuration and gain. Shares the
  /// kernel evaluations with the stationary density, and discretizes the
  /// drift consistently with it: V_{i+1/2} = K D (c_{i+1} - c_i) / dx.
  FaceVelocity face_velocity(double gain_K) const;

  DensityField density(double gain_K) const;
  double error(double gain_K, const DensityField& desired) const;
  /// Central difference of error() in K with half-width kGainFdStep.
  double error_gradient(double gain_K, const DensityField& desired) const;

 private:
  PeriodicGrid grid_;
  double mass_MT_;
  double diffusion_D_;
  std::vector<double> log_profile_;
  double closing_step_ = 0.0;
};

/// rho_ss(x) = Z exp(integral_{-pi}^{x} K M_H / (D N) sum_j f(xi - H_j) dxi).
/// The exact kernel uses its closed-form antiderivative; a smoothed kernel is
/// integrated by the trapezoid rule over the nodes.
DensityField steady_state_density(const HerderConfiguration& herders, double gain_K,
                                  const PeriodicGrid& grid, const SteadyStateParams& params = {});

/// L2 distance between desired and the stationary density.
double ss_error(const HerderConfiguration& herders, double gain_K, const DensityField& desired,
                const SteadyStateParams& params = {});

/// One explicit Euler step of K' = -alpha d/dK ||rho_ss - desired||, clamped
/// at K_min.
GainState adapt_gain_step(const GainState& state, const HerderConfiguration& herders,
                          const DensityField& desired, double dt,
                          const SteadyStateParams& params = {});

/// Same update reusing an already computed profile.
GainState adapt_gain_step(const GainState& state, const SteadyStateProfile& profile,
                          const DensityField& desired, double dt);

}  // namespace shepherd
