#include "shepherd/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace shepherd {

int PhysicsConfig::horizon_steps() const {
  return static_cast<int>(std::llround(T_horizon / dt));
}

void PhysicsConfig::validate() const {
  if (n_nodes < 3) throw std::invalid_argument("physics: n_nodes must be at least 3");
  if (n_herders < 1) throw std::invalid_argument("physics: need at least one herder");
  if (!(D > 0.0)) throw std::invalid_argument("physics: D must be positive");
  if (!(v_max > 0.0)) throw std::invalid_argument("physics: v_max must be positive");
  if (!(M_H >= 0.0) || !(M_T > 0.0)) throw std::invalid_argument("physics: invalid masses");
  if (!(T_horizon > 0.0)) throw std::invalid_argument("physics: T_horizon must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("physics: alpha must be nonnegative");
  kernel().validate();
  pde().validate();
}

}  // namespace shepherd
