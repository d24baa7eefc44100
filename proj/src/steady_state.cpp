#include "shepherd/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shepherd {

DensityField desired_distribution(const PeriodicGrid& grid, double kappa, double mass_MT) {
  if (!(kappa > 0.0)) throw std::invalid_argument("desired_distribution: kappa must be positive");
  DensityField field(grid);
  for (int i = 0; i < grid.size(); ++i) field[i] = std::exp(kappa * std::cos(grid.node(i)));
  field.normalize(mass_MT);
  return field;
}

SteadyStateProfile::SteadyStateProfile(const PeriodicGrid& grid,
                                       const HerderConfiguration& herders,
                                       const SteadyStateParams& params)
    : grid_(grid),
      mass_MT_(params.mass_MT),
      diffusion_D_(params.diffusion_D),
      log_profile_(grid.size(), 0.0) {
  if (!(params.diffusion_D > 0.0))
    throw std::invalid_argument("steady_state_density: diffusion must be positive");
  params.kernel.validate();
  if (herders.count() == 0) return;
  const double scale = herders.mass_MH / (params.diffusion_D * herders.count());

  if (params.kernel.smoothing_eps == 0.0) {
    const auto phi = kernel_potential(grid, herders.positions, params.kernel);
    // phi is referenced to F(wrap(-pi - H_j)); the constant cancels in Z.
    const double phi0 = phi[0];
    for (int i = 0; i < grid.size(); ++i) log_profile_[i] = scale * (phi[i] - phi0);
    closing_step_ = -log_profile_.back();
    return;
  }

  const auto v = velocity_field(grid, herders, 1.0, params.kernel);
  const double weight = 0.5 * grid.dx() / params.diffusion_D;
  for (int i = 1; i < grid.size(); ++i)
    log_profile_[i] = log_profile_[i - 1] + weight * (v[i - 1] + v[i]);
  closing_step_ = weight * (v.back() + v.front());
}

double SteadyStateProfile::periodic_mismatch() const {
  return log_profile_.back() + closing_step_ - log_profile_.front();
}

FaceVelocity SteadyStateProfile::face_velocity(double gain_K) const {
  const int n = grid_.size();
  const double scale = gain_K * diffusion_D_ / grid_.dx();
  FaceVelocity face;
  face.values.resize(n);
  for (int i = 0; i + 1 < n; ++i) face.values[i] = scale * (log_profile_[i + 1] - log_profile_[i]);
  face.values[n - 1] = scale * closing_step_;
  return face;
}

DensityField SteadyStateProfile::density(double gain_K) const {
  DensityField field(grid_);
  double peak = -INFINITY;
  for (double c : log_profile_) peak = std::max(peak, gain_K * c);
  for (int i = 0; i < grid_.size(); ++i) field[i] = std::exp(gain_K * log_profile_[i] - peak);
  field.normalize(mass_MT_);
  return field;
}

double SteadyStateProfile::error(double gain_K, const DensityField& desired) const {
  return l2_norm(desired, density(gain_K));
}

double SteadyStateProfile::error_gradient(double gain_K, const DensityField& desired) const {
  return (error(gain_K + kGainFdStep, desired) - error(gain_K - kGainFdStep, desired)) /
         (2.0 * kGainFdStep);
}

DensityField steady_state_density(const HerderConfiguration& herders, double gain_K,
                                  const PeriodicGrid& grid, const SteadyStateParams& params) {
  return SteadyStateProfile(grid, herders, params).density(gain_K);
}

double ss_error(const HerderConfiguration& herders, double gain_K, const DensityField& desired,
                const SteadyStateParams& params) {
  return SteadyStateProfile(desired.grid(), herders, params).error(gain_K, desired);
}

GainState adapt_gain_step(const GainState& state, const SteadyStateProfile& profile,
                          const DensityField& desired, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("adapt_gain_step: dt must be positive");
  GainState next = state;
  if (state.alpha == 0.0) return next;
  const double g = profile.error_gradient(state.K, desired);
  next.K = std::max(state.K_min, state.K - state.alpha * g * dt);
  return next;
}

GainState adapt_gain_step(const GainState& state, const HerderConfiguration& herders,
                          const DensityField& desired, double dt,
                          const SteadyStateParams& params) {
  return adapt_gain_step(state, SteadyStateProfile(desired.grid(), herders, params), desired, dt);
}

}  // namespace shepherd
