// SPDX-License-Identifier: Apache-2.0

#include "rlstar/ppmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

constexpr double kPi = std::numbers::pi;

double affine_to_unit(double value, double lo, double hi) {
  double t = 2.0 * (value - lo) / (hi - lo) - 1.0;
  return std::clamp(t, -1.0, 1.0);
}

void check_known_keys(const nlohmann::json& j,
                      std::initializer_list<const char*> allowed,
                      const char* context) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string(context) + ": unknown key \"" + key + "\"");
    }
  }
}

}  // namespace

double TaskConfig::max_distance() const {
  return 2.0 * grid_half_extent * std::numbers::sqrt2;
}

void TaskConfig::validate() const {
  if (!(grid_half_extent > 0.0)) {
    throw ConfigError("task: grid_half_extent must be positive");
  }
  if (!(goal_radius > 0.0)) {
    throw ConfigError("task: goal_radius must be positive");
  }
  if (time_limit < 1) {
    throw ConfigError("task: time_limit must be at least 1");
  }
  if (reward.c_veloc < 0.0 || reward.c_alive < 0.0 || reward.c_turn < 0.0) {
    throw ConfigError("task: reward constants must be nonnegative");
  }
  if (!(velocity_norm_limit > 0.0)) {
    throw ConfigError("task: velocity_norm_limit must be positive");
  }
}

Waypoint sample_waypoint(Rng& rng, double half_extent) {
  Waypoint wp;
  wp.x = rng.uniform(-half_extent, half_extent);
  wp.y = rng.uniform(-half_extent, half_extent);
  return wp;
}

double distance_to(const RoverState& rover, const Waypoint& wp) {
  return std::hypot(wp.x - rover.x, wp.y - rover.y);
}

Observation build_observation(const RoverState& rover, const Waypoint& wp,
                              const TaskConfig& cfg) {
  const double h = cfg.grid_half_extent;
  const double v = cfg.velocity_norm_limit;
  const double angle_to_wp =
      wrap_angle(std::atan2(wp.y - rover.y, wp.x - rover.x) - rover.yaw);
  const double dist = distance_to(rover, wp);

  Observation obs(9);
  obs[0] = affine_to_unit(rover.x, -h, h);
  obs[1] = affine_to_unit(rover.y, -h, h);
  obs[2] = affine_to_unit(rover.v_forward, -v, v);
  obs[3] = affine_to_unit(rover.v_lateral, -v, v);
  obs[4] = affine_to_unit(rover.yaw, -kPi, kPi);
  obs[5] = affine_to_unit(angle_to_wp, -kPi, kPi);
  obs[6] = affine_to_unit(dist, 0.0, cfg.max_distance());
  obs[7] = affine_to_unit(wp.x, -h, h);
  obs[8] = affine_to_unit(wp.y, -h, h);
  return obs;
}

double compute_reward(double prev_distance, double distance, double yaw_rate,
                      const RewardConstants& consts, bool goal_reached) {
  const double progress =
      goal_reached ? kGoalProgressCredit : prev_distance - distance;
  return consts.c_veloc * progress - consts.c_alive -
         consts.c_turn * std::abs(yaw_rate);
}

Termination check_termination(EpisodeState& ep, const RoverState& rover,
                              double distance, const TaskConfig& cfg, Rng& rng) {
  Termination result;
  result.goal_reached = distance <= cfg.goal_radius;
  if (result.goal_reached) {
    ep.waypoints_reached += 1;
    if (ep.waypoints_reached >= 2) {
      result.done = true;
    } else {
      ep.current_waypoint = sample_waypoint(rng, cfg.grid_half_extent);
      ep.prev_distance = distance_to(rover, ep.current_waypoint);
    }
  } else {
    ep.prev_distance = distance;
  }
  if (ep.step_count >= cfg.time_limit) {
    result.done = true;
  }
  return result;
}

PpmcEnv::PpmcEnv(TaskConfig task, RoverParams rover_params, std::uint64_t seed)
    : task_(task), params_(rover_params), rng_(seed) {
  task_.validate();
  params_.validate();
  action_spec_ = ActionSpec{2, {0.0, 0.0}, {1.0, 1.0}};
  obs_spec_ = ObservationSpec{9, std::vector<double>(9, -1.0),
                              std::vector<double>(9, 1.0)};
  start_episode();
}

Observation PpmcEnv::reset(std::optional<std::uint64_t> seed) {
  if (seed.has_value()) {
    rng_ = Rng(*seed);
  }
  return start_episode();
}

Observation PpmcEnv::start_episode() {
  rover_ = reset_rover(rng_.uniform(-kPi, kPi));
  episode_ = EpisodeState{};
  episode_.current_waypoint = sample_waypoint(rng_, task_.grid_half_extent);
  episode_.prev_distance = distance_to(rover_, episode_.current_waypoint);
  done_ = false;
  return build_observation(rover_, episode_.current_waypoint, task_);
}

Observation PpmcEnv::reset_to(const RoverState& rover, const Waypoint& wp) {
  rover_ = rover;
  episode_ = EpisodeState{};
  episode_.current_waypoint = wp;
  episode_.prev_distance = distance_to(rover_, wp);
  done_ = false;
  return build_observation(rover_, wp, task_);
}

StepResult PpmcEnv::step(std::span<const double> action) {
  if (done_) {
    throw EpisodeFinished("step() called after episode end; reset first");
  }
  if (action.size() != static_cast<std::size_t>(action_spec_.dim)) {
    throw ActionDimensionMismatch("expected action of length 2, got " +
                                  std::to_string(action.size()));
  }

  std::array<double, 2> motors{};
  int clamped = 0;
  for (int i = 0; i < 2; ++i) {
    double a = std::clamp(action[i], action_spec_.low[i], action_spec_.high[i]);
    if (a != action[i]) {
      ++clamped;
    }
    motors[i] = a;
  }

  rover_ = apply_motors(rover_, motors, params_);
  episode_.step_count += 1;

  const double prev_distance = episode_.prev_distance;
  const double distance = distance_to(rover_, episode_.current_waypoint);
  const Termination term =
      check_termination(episode_, rover_, distance, task_, rng_);
  const double reward = compute_reward(prev_distance, distance,
                                       rover_.yaw_rate, task_.reward,
                                       term.goal_reached);
  done_ = term.done;

  StepResult result;
  result.observation = build_observation(rover_, episode_.current_waypoint, task_);
  result.reward = reward;
  result.done = done_;
  result.info["progress"] = prev_distance - distance;
  result.info["yaw_rate"] = rover_.yaw_rate;
  result.info["distance_to_goal"] = distance_to(rover_, episode_.current_waypoint);
  result.info["clamped_actions"] = static_cast<double>(clamped);
  result.info["waypoints_reached"] = static_cast<double>(episode_.waypoints_reached);
  return result;
}

void register_builtin_tasks() {
  EnvRegistry& registry = EnvRegistry::instance();
  if (registry.contains("ppmc")) {
    return;
  }
  registry.register_task(
      "ppmc", [](const nlohmann::json& config, std::uint64_t seed) {
        TaskConfig task;
        RoverParams rover;
        if (config.contains("task_config")) {
          task = task_config_from_json(config.at("task_config"));
        }
        if (config.contains("rover")) {
          rover = rover_params_from_json(config.at("rover"));
        }
        return std::make_unique<PpmcEnv>(task, rover, seed);
      });
}

TaskConfig task_config_from_json(const nlohmann::json& j) {
  check_known_keys(j,
                   {"grid_half_extent", "goal_radius", "time_limit", "c_veloc",
                    "c_alive", "c_turn", "velocity_norm_limit"},
                   "task_config");
  TaskConfig cfg;
  try {
    cfg.grid_half_extent = j.value("grid_half_extent", cfg.grid_half_extent);
    cfg.goal_radius = j.value("goal_radius", cfg.goal_radius);
    cfg.time_limit = j.value("time_limit", cfg.time_limit);
    cfg.reward.c_veloc = j.value("c_veloc", cfg.reward.c_veloc);
    cfg.reward.c_alive = j.value("c_alive", cfg.reward.c_alive);
    cfg.reward.c_turn = j.value("c_turn", cfg.reward.c_turn);
    cfg.velocity_norm_limit =
        j.value("velocity_norm_limit", cfg.velocity_norm_limit);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task_config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RoverParams rover_params_from_json(const nlohmann::json& j) {
  check_known_keys(
      j, {"track_width", "max_wheel_speed", "action_multiplier", "dt"}, "rover");
  RoverParams params;
  try {
    params.track_width = j.value("track_width", params.track_width);
    params.max_wheel_speed = j.value("max_wheel_speed", params.max_wheel_speed);
    params.action_multiplier =
        j.value("action_multiplier", params.action_multiplier);
    params.dt = j.value("dt", params.dt);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rover: ") + e.what());
  }
  params.validate();
  return params;
}

nlohmann::json task_config_to_json(const TaskConfig& cfg) {
  return nlohmann::json{{"grid_half_extent", cfg.grid_half_extent},
                        {"goal_radius", cfg.goal_radius},
                        {"time_limit", cfg.time_limit},
                        {"c_veloc", cfg.reward.c_veloc},
                        {"c_alive", cfg.reward.c_alive},
                        {"c_turn", cfg.reward.c_turn},
                        {"velocity_norm_limit", cfg.velocity_norm_limit}};
}

nlohmann::json rover_params_to_json(const RoverParams& params) {
  return nlohmann::json{{"track_width", params.track_width},
                        {"max_wheel_speed", params.max_wheel_speed},
                        {"action_multiplier", params.action_multiplier},
                        {"dt", params.dt}};
}

}  // namespace rlstar
