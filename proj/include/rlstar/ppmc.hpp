// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_PPMC_HPP_
#define RLSTAR_PPMC_HPP_

#include <cstdint>
#include <optional>
#include <span>

#include "rlstar/env.hpp"
#include "rlstar/rng.hpp"
#include "rlstar/rover.hpp"

namespace rlstar {

// Goal position inside the square training grid.
struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

// Weights of the per-step reward: progress gain, alive penalty, turn penalty.
struct RewardConstants {
  double c_veloc = 50.0;  // reward per meter of progress toward the waypoint
  double c_alive = 0.5;   // constant per-step penalty
  double c_turn = 1.0;    // penalty per rad/s of yaw rate
};

// Progress credited for a capture step in place of the measured progress.
inline constexpr double kGoalProgressCredit = 0.5;

struct TaskConfig {
  double grid_half_extent = 5.0;    // waypoints drawn from [-h, h]^2
  double goal_radius = 0.5;         // m; capture when distance <= this
  int time_limit = 1000;            // steps per episode
  RewardConstants reward;
  double velocity_norm_limit = 0.4; // body velocities normalized over [-v, v]

  // Largest distance representable inside the grid (its diagonal).
  double max_distance() const;

  void validate() const;
};

// Episode bookkeeping: waypoint progress baseline and termination counters.
struct EpisodeState {
  Waypoint current_waypoint;
  int waypoints_reached = 0;  // 0, 1 or 2
  int step_count = 0;
  double prev_distance = 0.0; // baseline for the next progress measurement
};

struct Termination {
  bool done = false;
  bool goal_reached = false;
};

// Uniform waypoint over [-half_extent, half_extent]^2; advances the stream.
Waypoint sample_waypoint(Rng& rng, double half_extent);

double distance_to(const RoverState& rover, const Waypoint& wp);

// The 9-element observation, each component affinely mapped to [-1, 1] and
// clamped: x, y, v_forward, v_lateral, yaw, angle to waypoint, distance to
// waypoint, waypoint x, waypoint y.
Observation build_observation(const RoverState& rover, const Waypoint& wp,
                              const TaskConfig& cfg);

// Per-step reward: c_veloc * X - c_alive - c_turn * |yaw_rate|, where X is
// the distance progress made this step, replaced by the fixed capture credit
// when the waypoint was reached.
double compute_reward(double prev_distance, double distance, double yaw_rate,
                      const RewardConstants& consts, bool goal_reached);

// Applies the capture/time-limit rules to the episode state after a step.
// `distance` is measured against the waypoint the rover was approaching.
// On a first capture, a fresh waypoint is sampled and the progress baseline
// is rebased to it; otherwise the baseline becomes `distance`.
// Assumes ep.step_count has already been advanced for this step.
Termination check_termination(EpisodeState& ep, const RoverState& rover,
                              double distance, const TaskConfig& cfg, Rng& rng);

// The waypoint task wired to the built-in rover simulator.
class PpmcEnv final : public Environment {
 public:
  PpmcEnv(TaskConfig task, RoverParams rover, std::uint64_t seed);

  const ActionSpec& action_spec() const override { return action_spec_; }
  const ObservationSpec& observation_spec() const override { return obs_spec_; }

  Observation reset(std::optional<std::uint64_t> seed = std::nullopt) override;
  StepResult step(std::span<const double> action) override;

  // Begin an episode from an explicit pose and waypoint (scripted scenarios).
  Observation reset_to(const RoverState& rover, const Waypoint& wp);

  const RoverState& rover() const { return rover_; }
  const EpisodeState& episode() const { return episode_; }
  const TaskConfig& task_config() const { return task_; }
  const RoverParams& rover_params() const { return params_; }

 private:
  Observation start_episode();

  TaskConfig task_;
  RoverParams params_;
  Rng rng_;
  RoverState rover_;
  EpisodeState episode_;
  ActionSpec action_spec_;
  ObservationSpec obs_spec_;
  bool done_ = false;
};

// Make the built-in tasks available through the environment registry.
// Safe to call more than once.
void register_builtin_tasks();

// Construct a TaskConfig/RoverParams pair from a JSON config section,
// throwing ConfigError on unknown keys or bad values.
TaskConfig task_config_from_json(const nlohmann::json& j);
RoverParams rover_params_from_json(const nlohmann::json& j);
nlohmann::json task_config_to_json(const TaskConfig& cfg);
nlohmann::json rover_params_to_json(const RoverParams& params);

}  // namespace rlstar

#endif  // RLSTAR_PPMC_HPP_
