#pragma once

#include <span>
#include <vector>

#include "shepherd/geometry.hpp"

namespace shepherd {

/// ||desired - final||_L2 at the end of a run.
double steady_state_error(const DensityField& density_final, const DensityField& desired);

/// (1/T) sum_k |u(t_k)|_2 dt over the recorded control actions. Throws on an
/// empty history.
double mean_control_effort(std::span<const std::vector<double>> action_history, double dt,
                           double horizon_T);

/// 2% settling time of the herders. position_history[k] holds all herder
/// positions at t = k dt, k = 0..K with K dt = T. Distances are wrapped. A
/// herder whose final position equals its initial one contributes 0.
double settling_time_herders(std::span<const std::vector<double>> position_history, double dt);

/// 2% settling time of an error signal sampled at t = k dt towards e_ss.
/// Returns 0 when the initial value already equals e_ss.
double settling_time_targets(std::span<const double> error_history, double e_ss, double dt);

/// Earliest sample time after which |signal| stays at or below threshold.
double decay_time(std::span<const double> signal, double threshold, double dt);

/// Order statistics of a sample (linear interpolation between order stats).
struct Summary {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double p10 = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double p90 = 0.0;
  double max = 0.0;
};

double quantile(std::vector<double> values, double q);
Summary summarize(std::span<const double> values);

}  // namespace shepherd
