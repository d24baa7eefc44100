#include "shepherd/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shepherd {

namespace {
constexpr double kNegativeTolerance = -1e-12;
}

int PdeConfig::substeps() const {
  const double ratio = dt_control / dt_pde;
  const long long rounded = std::llround(ratio);
  if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > 1e-9 * ratio)
    throw std::invalid_argument("PdeConfig: dt_control must be an integer multiple of dt_pde");
  return static_cast<int>(rounded);
}

void PdeConfig::validate() const {
  if (!(dt_pde > 0.0) || !(dt_control > 0.0))
    throw std::invalid_argument("PdeConfig: timesteps must be positive");
  if (!(diffusion_D >= 0.0)) throw std::invalid_argument("PdeConfig: negative diffusion");
  (void)substeps();
}

FaceVelocity FaceVelocity::from_nodes(std::span<const double> nodal) {
  const std::size_t n = nodal.size();
  FaceVelocity out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = 0.5 * (nodal[i] + nodal[(i + 1) % n]);
  return out;
}

FaceVelocity FaceVelocity::from_herders(const PeriodicGrid& grid,
                                        const HerderConfiguration& herders, double gain_K,
                                        const KernelParams& params) {
  return FaceVelocity{face_velocity(grid, herders, gain_K, params)};
}

double FaceVelocity::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void check_stability(const PeriodicGrid& grid, const FaceVelocity& velocity,
                     const PdeConfig& cfg) {
  const double dx = grid.dx();
  const double diffusion_number = cfg.diffusion_D * cfg.dt_pde / (dx * dx);
  const double cfl = velocity.max_abs() * cfg.dt_pde / dx;
  if (!(diffusion_number < 0.5) || !(cfl < 1.0)) {
    std::ostringstream msg;
    msg << "pde_step: unstable explicit step (D*dt/dx^2 = " << diffusion_number
        << ", CFL = " << cfl << ")";
    throw std::domain_error(msg.str());
  }
}

PdeSolver::PdeSolver(DensityField initial, PdeConfig cfg)
    : density_(std::move(initial)), cfg_(cfg), flux_(density_.size(), 0.0) {
  cfg_.validate();
}

void PdeSolver::step_unchecked(std::span<const double> face) {
  const int n = density_.size();
  const double dx = density_.grid().dx();
  const double r = cfg_.dt_pde / dx;
  const double d = cfg_.diffusion_D * cfg_.dt_pde / (dx * dx);
  auto rho = density_.values();

  if (cfg_.scheme == FluxScheme::kCentral) {
    for (int i = 0; i < n - 1; ++i) flux_[i] = 0.5 * face[i] * (rho[i] + rho[i + 1]);
    flux_[n - 1] = 0.5 * face[n - 1] * (rho[n - 1] + rho[0]);
  } else {
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1 == n) ? 0 : i + 1;
      flux_[i] = face[i] >= 0.0 ? face[i] * rho[i] : face[i] * rho[ip];
    }
  }

  // Diffusion uses the pre-step values; keep the wrap-around neighbours.
  const double rho_first = rho[0];
  double prev = rho[n - 1];
  for (int i = 0; i < n; ++i) {
    const double cur = rho[i];
    const double next = (i + 1 == n) ? rho_first : rho[i + 1];
    const double flux_left = (i == 0) ? flux_[n - 1] : flux_[i - 1];
    rho[i] = cur - r * (flux_[i] - flux_left) + d * (next - 2.0 * cur + prev);
    prev = cur;
  }
  time_ += cfg_.dt_pde;
  ++steps_;
}

void PdeSolver::check_positivity() const {
  const double m = density_.min_value();
  if (m < kNegativeTolerance) {
    std::ostringstream msg;
    msg << "pde_step: density went negative (" << m << ") at t = " << time_;
    throw std::runtime_error(msg.str());
  }
}

void PdeSolver::step(const FaceVelocity& velocity) {
  if (static_cast<int>(velocity.values.size()) != density_.size())
    throw std::invalid_argument("pde_step: velocity size does not match grid");
  check_stability(density_.grid(), velocity, cfg_);
  step_unchecked(velocity.values);
  check_positivity();
}

void PdeSolver::advance_window(const FaceVelocity& velocity) {
  if (static_cast<int>(velocity.values.size()) != density_.size())
    throw std::invalid_argument("pde_step: velocity size does not match grid");
  check_stability(density_.grid(), velocity, cfg_);
  const int k = cfg_.substeps();
  for (int s = 0; s < k; ++s) step_unchecked(velocity.values);
  check_positivity();
}

void PdeSolver::run_fixed(const HerderConfiguration& herders, double gain_K, double t_end,
                          const KernelParams& params,
                          const std::function<void(double, const DensityField&)>& observer) {
  const auto velocity = FaceVelocity::from_herders(density_.grid(), herders, gain_K, params);
  const double window = cfg_.dt_control;
  while (time_ + 0.5 * window <= t_end + 1e-12) {
    advance_window(velocity);
    if (observer) observer(time_, density_);
  }
}

DensityField pde_step(const DensityField& density, const FaceVelocity& velocity,
                      const PdeConfig& cfg) {
  PdeConfig single = cfg;
  single.dt_control = cfg.dt_pde;
  PdeSolver solver(density, single);
  solver.step(velocity);
  return solver.density();
}

DensityField pde_step(const DensityField& density, std::span<const double> nodal_velocity,
                      const PdeConfig& cfg) {
  return pde_step(density, FaceVelocity::from_nodes(nodal_velocity), cfg);
}

DensityField simulate_window(const DensityField& density, const HerderConfiguration& herders,
                             double gain_K, const PdeConfig& cfg, const KernelParams& params) {
  PdeSolver solver(density, cfg);
  solver.advance_window(FaceVelocity::from_herders(density.grid(), herders, gain_K, params));
  return solver.density();
}

}  // namespace shepherd
