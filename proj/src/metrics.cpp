#include "shepherd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shepherd {

double steady_state_error(const DensityField& density_final, const DensityField& desired) {
  return l2_norm(desired, density_final);
}

double mean_control_effort(std::span<const std::vector<double>> action_history, double dt,
                           double horizon_T) {
  if (action_history.empty()) throw std::invalid_argument("mean_control_effort: empty history");
  if (!(horizon_T > 0.0)) throw std::invalid_argument("mean_control_effort: T must be positive");
  double integral = 0.0;
  for (const auto& u : action_history) {
    double sq = 0.0;
    for (double v : u) sq += v * v;
    integral += std::sqrt(sq) * dt;
  }
  return integral / horizon_T;
}

namespace {

// Time of the sample following the last one outside the band; 0 if none.
template <typename Deviation>
double settle_after_last_violation(std::size_t n, double band, double dt, Deviation dev) {
  for (std::size_t k = n; k-- > 0;) {
    if (dev(k) > band) return std::min(static_cast<double>(k + 1), static_cast<double>(n - 1)) * dt;
  }
  return 0.0;
}

}  // namespace

double settling_time_herders(std::span<const std::vector<double>> position_history, double dt) {
  if (position_history.empty()) return 0.0;
  const std::size_t n = position_history.size();
  const auto& first = position_history.front();
  const auto& last = position_history.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double excursion = std::abs(wrapped_signed_distance(first[i], last[i]));
    if (excursion == 0.0) continue;
    const double band = 0.02 * excursion;
    const double t = settle_after_last_violation(n, band, dt, [&](std::size_t k) {
      return std::abs(wrapped_signed_distance(position_history[k][i], last[i]));
    });
    worst = std::max(worst, t);
  }
  return worst;
}

double settling_time_targets(std::span<const double> error_history, double e_ss, double dt) {
  if (error_history.empty()) return 0.0;
  const double excursion = std::abs(error_history.front() - e_ss);
  if (excursion == 0.0) return 0.0;
  const double band = 0.02 * excursion;
  return settle_after_last_violation(error_history.size(), band, dt, [&](std::size_t k) {
    return std::abs(error_history[k] - e_ss);
  });
}

double decay_time(std::span<const double> signal, double threshold, double dt) {
  return settle_after_last_violation(signal.size(), threshold, dt,
                                     [&](std::size_t k) { return std::abs(signal[k]); });
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return NAN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / s.count;
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = s.count > 1 ? std::sqrt(var / (s.count - 1)) : 0.0;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.p10 = quantile(v, 0.10);
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.50);
  s.q3 = quantile(v, 0.75);
  s.p90 = quantile(v, 0.90);
  return s;
}

}  // namespace shepherd
