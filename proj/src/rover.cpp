// SPDX-License-Identifier: Apache-2.0

#include "rlstar/rover.hpp"

#include <cmath>
#include <numbers>

#include "rlstar/errors.hpp"

namespace rlstar {

void RoverParams::validate() const {
  if (!(track_width > 0.0) || !(max_wheel_speed > 0.0) ||
      !(action_multiplier > 0.0) || !(dt > 0.0)) {
    throw ConfigError("rover parameters must all be strictly positive");
  }
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double y = std::remainder(a, 2.0 * pi);
  if (y <= -pi) {
    y += 2.0 * pi;
  }
  return y;
}

RoverState apply_motors(const RoverState& state, const std::array<double, 2>& action,
                        const RoverParams& params) {
  const double scale = params.max_wheel_speed * params.action_multiplier;

  // Wheel speeds are action[i]*scale; summing/differencing the commands
  // before scaling keeps equal commands rotation-free and swapped commands
  // an exact mirror even when the compiler fuses multiply-adds.
  RoverState next = state;
  next.v_forward = 0.5 * (action[0] + action[1]) * scale;
  next.v_lateral = 0.0;
  next.yaw_rate = (action[1] - action[0]) * scale / params.track_width;

  next.x = state.x + next.v_forward * std::cos(state.yaw) * params.dt;
  next.y = state.y + next.v_forward * std::sin(state.yaw) * params.dt;
  next.yaw = wrap_angle(state.yaw + next.yaw_rate * params.dt);
  return next;
}

RoverState reset_rover(double seed_yaw) {
  RoverState state;
  state.yaw = wrap_angle(seed_yaw);
  return state;
}

}  // namespace rlstar
