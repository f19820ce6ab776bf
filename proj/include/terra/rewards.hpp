#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace terra {

struct RewardParams {
  double alpha_orientation = 5.0;
  double alpha_height = 10.0;
  double alpha_base = 2.0;
  double d_max = 0.5;                      // distance where the base reward saturates
  double collision_penalty_value = -10.0;  // must stay negative
};

// exp(-alpha * error): 1 at zero error, strictly decreasing.
inline double orientation_reward(double error, double alpha = 5.0) {
  if (error < 0.0) throw std::invalid_argument("orientation error must be non-negative");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  return std::exp(-alpha * error);
}

inline double base_height_reward(double error, double alpha = 10.0) {
  if (error < 0.0) throw std::invalid_argument("height error must be non-negative");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  return std::exp(-alpha * error);
}

// exp(-alpha * (d_max - min(d, d_max))): exactly 1 once the nearest obstacle
// is d_max or farther, exp(-alpha * d_max) with an obstacle touching.
inline double base_distance_reward(double distance, double alpha = 2.0, double d_max = 0.5) {
  if (distance < 0.0) throw std::invalid_argument("distance must be non-negative");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (d_max <= 0.0) throw std::invalid_argument("d_max must be positive");
  return std::exp(-alpha * (d_max - std::min(distance, d_max)));
}

inline double collision_penalty(bool collided, double value = -10.0) {
  if (value >= 0.0) throw std::invalid_argument("collision penalty must be negative");
  return collided ? value : 0.0;
}

}  // namespace terra
