#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shepherd::ppo {

struct Transition {
  std::vector<double> observation;
  double reward = 0.0;
  /// Episode ended (by time limit or otherwise); the next call must be reset().
  bool done = false;
  /// Episode was cut by a time limit rather than reaching a terminal state;
  /// the trainer bootstraps the value of `observation` in that case.
  bool truncated = false;
};

/// Minimal continuous-control environment contract used by the trainer.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Symmetric bound on each action component.
  virtual double action_bound() const = 0;

  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual Transition step(std::span<const double> action) = 0;
};

}  // namespace shepherd::ppo
