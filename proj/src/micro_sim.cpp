#include "shepherd/micro_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shepherd {

HerderState herder_step(const HerderState& state, std::span<const double> actions,
                        double disturbance_vd, double dt) {
  if (actions.size() != state.positions.size())
    throw std::invalid_argument("herder_step: one action per herder required");
  if (!(dt > 0.0)) throw std::invalid_argument("herder_step: dt must be positive");
  HerderState next = state;
  next.last_actions.resize(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!std::isfinite(actions[i])) throw std::invalid_argument("herder_step: non-finite action");
    const double u = std::clamp(actions[i], -state.v_max, state.v_max);
    next.last_actions[i] = u;
    next.positions[i] = wrap(state.positions[i] + (u + disturbance_vd) * dt);
  }
  return next;
}

double TargetEnsemble::drift_scale(int n_herders) const {
  if (n_herders == 0) return 0.0;
  if (normalization == DriftNormalization::kMeanField) return mass_MH / n_herders;
  return 1.0 / (n_herders + static_cast<double>(positions.size()));
}

TargetEnsemble target_sde_step(const TargetEnsemble& ensemble,
                               std::span<const double> herder_positions, double gain_K,
                               double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("target_sde_step: dt must be positive");
  TargetEnsemble next = ensemble;
  const double drift = gain_K * ensemble.drift_scale(static_cast<int>(herder_positions.size()));
  const double noise = std::sqrt(2.0 * ensemble.diffusion_D * dt);
  std::normal_distribution<double> normal(0.0, 1.0);
  const KernelParams kernel{};
  for (double& t : next.positions) {
    double acc = 0.0;
    for (double h : herder_positions) acc += kernel_eval(wrapped_signed_distance(t, h), kernel);
    const double xi = noise > 0.0 ? normal(rng) : 0.0;
    t = wrap(t + drift * acc * dt + noise * xi);
  }
  return next;
}

TargetEnsemble uniform_ensemble(int n_targets, Rng& rng, double diffusion_D, double mass_MH) {
  if (n_targets < 1) throw std::invalid_argument("uniform_ensemble: need at least one target");
  std::uniform_real_distribution<double> uniform(-kPi, kPi);
  TargetEnsemble ens;
  ens.diffusion_D = diffusion_D;
  ens.mass_MH = mass_MH;
  ens.positions.resize(n_targets);
  for (double& p : ens.positions) p = wrap(uniform(rng));
  return ens;
}

DensityField empirical_density(std::span<const double> positions, const PeriodicGrid& grid,
                               double total_mass) {
  if (positions.empty()) throw std::invalid_argument("empirical_density: empty ensemble");
  const int n = grid.size();
  DensityField field(grid);
  for (double p : positions) {
    long long cell = std::llround((wrap(p) + kPi) / grid.dx());
    cell %= n;
    field[static_cast<int>(cell)] += 1.0;
  }
  const double scale = total_mass / (static_cast<double>(positions.size()) * grid.dx());
  for (double& v : field.values()) v *= scale;
  return field;
}

DensityField coarsen(const DensityField& field, int factor) {
  const int n = field.size();
  if (factor < 1 || n % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide the node count");
  const int m = n / factor;
  DensityField out{PeriodicGrid(m)};
  const int half = factor / 2;
  const bool even = factor % 2 == 0;
  for (int k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int off = -half; off <= half; ++off) {
      const double w = (even && (off == -half || off == half)) ? 0.5 : 1.0;
      acc += w * field[((k * factor + off) % n + n) % n];
    }
    out[k] = acc / factor;
  }
  return out;
}

}  // namespace shepherd
