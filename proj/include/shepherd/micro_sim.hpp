#pragma once

#include <random>
#include <span>
#include <vector>

#include "shepherd/geometry.hpp"
#include "shepherd/interaction.hpp"

namespace shepherd {

using Rng = std::mt19937_64;

/// Single-integrator herders.
struct HerderState {
  std::vector<double> positions;
  std::vector<double> last_actions;
  double v_max = 3.0;
};

/// Integrates the herders over dt. Actions are clipped to [-v_max, v_max]
/// first; the disturbance is added afterwards and is not clipped. Throws
/// std::invalid_argument on non-finite or mis-sized actions.
HerderState herder_step(const HerderState& state, std::span<const double> actions,
                        double disturbance_vd, double dt);

/// How the particle drift is scaled relative to the kernel sum.
enum class DriftNormalization {
  /// K * M_H / N_H, consistent with the mean-field PDE.
  kMeanField,
  /// K / (N_H + N_T), the literal agent-level normalization.
  kAgentCount,
};

struct TargetEnsemble {
  std::vector<double> positions;
  double diffusion_D = 0.05;
  double mass_MH = 0.3;
  DriftNormalization normalization = DriftNormalization::kMeanField;

  /// Coefficient multiplying K * sum_i f(T_j - H_i).
  double drift_scale(int n_herders) const;
};

/// Euler-Maruyama step of dT = K s sum_i f(T - H_i) dt + sqrt(2D) dB.
TargetEnsemble target_sde_step(const TargetEnsemble& ensemble,
                               std::span<const double> herder_positions, double gain_K,
                               double dt, Rng& rng);

/// Particles drawn uniformly on the circle.
TargetEnsemble uniform_ensemble(int n_targets, Rng& rng, double diffusion_D = 0.05,
                                double mass_MH = 0.3);

/// Nearest-node histogram scaled so that integrate(result) == total_mass.
DensityField empirical_density(std::span<const double> positions, const PeriodicGrid& grid,
                               double total_mass);

/// Block average onto a grid with n / factor nodes, centred on the coarse
/// nodes (which coincide with every factor-th fine node). Mass is preserved.
DensityField coarsen(const DensityField& field, int factor);

}  // namespace shepherd
