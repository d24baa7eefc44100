#pragma once

#include <functional>
#include <span>
#include <vector>

#include "shepherd/geometry.hpp"
#include "shepherd/interaction.hpp"

namespace shepherd {

enum class FluxScheme {
  /// Flux V_{i+1/2} * (rho_i + rho_{i+1}) / 2. Second order; positive while
  /// the cell Peclet number |V| dx / D stays below 2.
  kCentral,
  /// First-order upwind flux. Positive under the CFL bound alone but adds
  /// |V| dx / 2 of numerical diffusion.
  kUpwind,
};

struct PdeConfig {
  double dt_pde = 0.0005;
  double dt_control = 0.01;
  double diffusion_D = 0.05;
  FluxScheme scheme = FluxScheme::kCentral;

  /// Number of PDE substeps per control step. Throws unless dt_control is an
  /// integer multiple of dt_pde.
  int substeps() const;
  void validate() const;
};

/// Velocities on the faces x_{i+1/2}, i = 0..n-1 (face n-1 sits between the
/// last node and node 0).
struct FaceVelocity {
  std::vector<double> values;

  static FaceVelocity from_nodes(std::span<const double> nodal);
  static FaceVelocity from_herders(const PeriodicGrid& grid, const HerderConfiguration& herders,
                                   double gain_K, const KernelParams& params = {});
  double max_abs() const;
};

/// Throws std::domain_error if the explicit step would violate the diffusion
/// or CFL bound for this velocity.
void check_stability(const PeriodicGrid& grid, const FaceVelocity& velocity, const PdeConfig& cfg);

/// One explicit Euler step of the conservative advection-diffusion scheme.
/// Total mass changes only by floating-point rounding.
DensityField pde_step(const DensityField& density, const FaceVelocity& velocity,
                      const PdeConfig& cfg);

/// Overload taking nodal velocities; faces are the mean of adjacent nodes.
DensityField pde_step(const DensityField& density, std::span<const double> nodal_velocity,
                      const PdeConfig& cfg);

/// Advances one control window (cfg.substeps() PDE steps) with the velocity
/// frozen at the given herder configuration.
DensityField simulate_window(const DensityField& density, const HerderConfiguration& herders,
                             double gain_K, const PdeConfig& cfg,
                             const KernelParams& params = {});

/// In-place stepper that reuses its scratch buffers; the hot path for long
/// runs.
class PdeSolver {
 public:
  PdeSolver(DensityField initial, PdeConfig cfg);

  const DensityField& density() const { return density_; }
  double time() const { return time_; }
  const PdeConfig& config() const { return cfg_; }

  void step(const FaceVelocity& velocity);
  /// cfg.substeps() steps under the same velocity. Stability is checked once
  /// per window.
  void advance_window(const FaceVelocity& velocity);

  /// Fixed herders until time() >= t_end. The optional observer fires after
  /// every window with (time, density).
  void run_fixed(const HerderConfiguration& herders, double gain_K, double t_end,
                 const KernelParams& params = {},
                 const std::function<void(double, const DensityField&)>& observer = {});

 private:
  void step_unchecked(std::span<const double> face);
  void check_positivity() const;

  DensityField density_;
  PdeConfig cfg_;
  std::vector<double> flux_;
  double time_ = 0.0;
  long long steps_ = 0;
};

}  // namespace shepherd
