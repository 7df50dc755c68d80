// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_ROVER_HPP_
#define RLSTAR_ROVER_HPP_

#include <array>

namespace rlstar {

// Ground-truth pose and body-frame velocities of the simulated rover.
struct RoverState {
  double x = 0.0;          // m
  double y = 0.0;          // m
  double yaw = 0.0;        // rad, wrapped to (-pi, pi]
  double v_forward = 0.0;  // m/s, body frame
  double v_lateral = 0.0;  // m/s, body frame; zero in the no-slip model
  double yaw_rate = 0.0;   // rad/s
};

// Kinematic parameters of the two-wheel-drive skid-steer rover.
struct RoverParams {
  double track_width = 0.3;       // m between left and right wheel contact lines
  double max_wheel_speed = 0.1;   // m/s per side at motor command 1.0
  double action_multiplier = 2.0; // scales motor commands to wheel speed
  double dt = 0.05;               // s per control step

  // Top straight-line speed with both motors at full command.
  double max_speed() const { return max_wheel_speed * action_multiplier; }

  void validate() const;  // throws ConfigError unless all fields are positive
};

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Advance the rover by one control step. Motor commands are the left and
// right side speeds in [0, 1]; callers clamp before passing them in.
RoverState apply_motors(const RoverState& state, const std::array<double, 2>& action,
                        const RoverParams& params);

// Rover at the origin with the given heading and zero velocities.
RoverState reset_rover(double seed_yaw);

}  // namespace rlstar

#endif  // RLSTAR_ROVER_HPP_
