#include "shepherd/interaction.hpp"

#include <cmath>
#include <stdexcept>

namespace shepherd {

void KernelParams::validate() const {
  if (!(length_L > 0.0)) throw std::invalid_argument("KernelParams: length_L must be positive");
  if (!(smoothing_eps >= 0.0))
    throw std::invalid_argument("KernelParams: smoothing_eps must be nonnegative");
}

HerderConfiguration HerderConfiguration::wrapped() const {
  HerderConfiguration out = *this;
  for (double& p : out.positions) p = wrap(p);
  return out;
}

HerderConfiguration HerderConfiguration::rotated(double delta) const {
  HerderConfiguration out = *this;
  for (double& p : out.positions) p = wrap(p + delta);
  return out;
}

double kernel_eval(double x, const KernelParams& params) {
  const double L = params.length_L;
  const double a = std::abs(x);
  const double magnitude =
      (std::exp((kTwoPi - a) / L) - std::exp(a / L)) / std::expm1(kTwoPi / L);
  double sign;
  if (params.smoothing_eps > 0.0)
    sign = std::tanh(x / params.smoothing_eps);
  else
    sign = (x > 0.0) - (x < 0.0);
  return sign * magnitude;
}

double kernel_antiderivative(double x, const KernelParams& params) {
  const double L = params.length_L;
  const double a = std::abs(x);
  const double e = std::exp(kTwoPi / L);
  return L * (e + 1.0 - std::exp((kTwoPi - a) / L) - std::exp(a / L)) / (e - 1.0);
}

std::vector<double> velocity_field(const PeriodicGrid& grid, const HerderConfiguration& herders,
                                   double gain_K, const KernelParams& params) {
  std::vector<double> v(grid.size(), 0.0);
  if (herders.count() == 0) return v;
  const double scale = gain_K * herders.mass_MH / herders.count();
  for (int i = 0; i < grid.size(); ++i) {
    const double xi = grid.node(i);
    double acc = 0.0;
    for (double h : herders.positions) acc += kernel_eval(wrapped_signed_distance(xi, h), params);
    v[i] = scale * acc;
  }
  return v;
}

std::vector<double> kernel_potential(const PeriodicGrid& grid, std::span<const double> positions,
                                     const KernelParams& params) {
  if (params.smoothing_eps > 0.0)
    throw std::invalid_argument("kernel_potential: closed form requires the exact kernel");
  std::vector<double> phi(grid.size(), 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    const double xi = grid.node(i);
    double acc = 0.0;
    for (double h : positions) acc += kernel_antiderivative(wrapped_signed_distance(xi, h), params);
    phi[i] = acc;
  }
  return phi;
}

std::vector<double> face_velocity(const PeriodicGrid& grid, const HerderConfiguration& herders,
                                  double gain_K, const KernelParams& params) {
  const int n = grid.size();
  std::vector<double> face(n, 0.0);
  if (herders.count() == 0) return face;
  if (params.smoothing_eps > 0.0) {
    const auto v = velocity_field(grid, herders, gain_K, params);
    for (int i = 0; i < n; ++i) face[i] = 0.5 * (v[i] + v[(i + 1) % n]);
    return face;
  }
  const auto phi = kernel_potential(grid, herders.positions, params);
  const double scale = gain_K * herders.mass_MH / herders.count() / grid.dx();
  for (int i = 0; i < n; ++i) face[i] = scale * (phi[(i + 1) % n] - phi[i]);
  return face;
}

}  // namespace shepherd
