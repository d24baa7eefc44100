#pragma once

#include "shepherd/fokker_planck.hpp"
#include "shepherd/geometry.hpp"
#include "shepherd/interaction.hpp"
#include "shepherd/steady_state.hpp"

namespace shepherd {

/// Physical and numerical parameters shared by every simulation. Defaults are
/// the reference scenario: two herders, a 250-node grid, horizon 150.
struct PhysicsConfig {
  int n_nodes = 250;
  double dt = 0.01;
  double dt_pde = 0.0005;
  double T_horizon = 150.0;
  int n_herders = 2;
  double D = 0.05;
  double L = kPi;
  double kappa = kDefaultKappa;
  double v_max = 3.0;
  double M_H = 0.3;
  double M_T = 0.7;
  double alpha = 0.2;
  double kernel_eps = 0.0;
  FluxScheme scheme = FluxScheme::kCentral;

  PeriodicGrid grid() const { return PeriodicGrid(n_nodes); }
  KernelParams kernel() const { return {L, kernel_eps}; }
  PdeConfig pde() const { return {dt_pde, dt, D, scheme}; }
  SteadyStateParams steady_state() const { return {D, M_T, kernel()}; }
  DensityField desired() const { return desired_distribution(grid(), kappa, M_T); }
  int horizon_steps() const;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

}  // namespace shepherd
