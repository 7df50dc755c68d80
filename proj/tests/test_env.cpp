// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlstar/errors.hpp"
#include "rlstar/ppmc.hpp"

using namespace rlstar;

namespace {

PpmcEnv make_env(std::uint64_t seed = 1) {
  return PpmcEnv(TaskConfig{}, RoverParams{}, seed);
}

}  // namespace

TEST_CASE("reset with the same seed is bit-identical") {
  PpmcEnv env = make_env();
  const Observation a = env.reset(7);
  const Observation b = env.reset(7);
  REQUIRE(a.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
  }
}

TEST_CASE("reset observations respect the [-1, 1] bounds") {
  PpmcEnv env = make_env();
  const Observation obs = env.reset(7);
  for (double v : obs) {
    CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("different seeds randomize the waypoint") {
  PpmcEnv env = make_env();
  const Observation a = env.reset(7);
  const Observation b = env.reset(8);
  CHECK((a[7] != b[7] || a[8] != b[8]));
}

TEST_CASE("seedless reset draws from the persistent stream") {
  PpmcEnv env = make_env();
  env.reset(7);
  const Observation a = env.reset();
  PpmcEnv env2 = make_env();
  env2.reset(7);
  const Observation b = env2.reset();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
  }
}

TEST_CASE("zero action from rest keeps the rover still and costs the alive penalty") {
  PpmcEnv env = make_env();
  env.reset(7);
  const RoverState before = env.rover();
  const StepResult result = env.step(std::vector<double>{0.0, 0.0});
  CHECK(env.rover().x == before.x);
  CHECK(env.rover().y == before.y);
  CHECK(env.rover().yaw == before.yaw);
  CHECK(result.reward == -0.5);
  CHECK(result.info.at("yaw_rate") == 0.0);
  CHECK(result.info.at("progress") == 0.0);
}

TEST_CASE("full-speed approach toward a 5 m waypoint breaks even") {
  PpmcEnv env = make_env();
  env.reset_to(reset_rover(0.0), Waypoint{5.0, 0.0});
  const StepResult result = env.step(std::vector<double>{1.0, 1.0});
  // progress 0.01 m at c_veloc 50 exactly cancels the 0.5 alive penalty
  CHECK(result.reward == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(result.info.at("progress") == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(result.info.at("distance_to_goal") == doctest::Approx(4.99).epsilon(1e-12));
}

TEST_CASE("wrong action length raises ActionDimensionMismatch") {
  PpmcEnv env = make_env();
  env.reset(7);
  CHECK_THROWS_AS(env.step(std::vector<double>{0.1, 0.2, 0.3}),
                  ActionDimensionMismatch);
  CHECK_THROWS_AS(env.step(std::vector<double>{0.1}), ActionDimensionMismatch);
}

TEST_CASE("stepping a finished episode raises EpisodeFinished") {
  TaskConfig task;
  task.time_limit = 2;
  PpmcEnv env(task, RoverParams{}, 3);
  env.reset(3);
  env.step(std::vector<double>{0.0, 0.0});
  const StepResult last = env.step(std::vector<double>{0.0, 0.0});
  CHECK(last.done);
  CHECK_THROWS_AS(env.step(std::vector<double>{0.0, 0.0}), EpisodeFinished);
  // reset recovers
  env.reset();
  CHECK_NOTHROW(env.step(std::vector<double>{0.0, 0.0}));
}

TEST_CASE("out-of-range actions are clamped and counted") {
  PpmcEnv env = make_env();
  env.reset_to(reset_rover(0.0), Waypoint{5.0, 0.0});
  const StepResult result = env.step(std::vector<double>{2.0, -1.0});
  CHECK(result.info.at("clamped_actions") == 2.0);
  // clamped to [1, 0]: right wheel stopped, left at full speed
  CHECK(env.rover().yaw_rate == doctest::Approx(-0.2 / 0.3).epsilon(1e-12));

  env.reset_to(reset_rover(0.0), Waypoint{5.0, 0.0});
  const StepResult ok = env.step(std::vector<double>{0.5, 0.5});
  CHECK(ok.info.at("clamped_actions") == 0.0);
}

TEST_CASE("identical seed and action sequence replay bit-identically") {
  PpmcEnv env1 = make_env(5);
  PpmcEnv env2 = make_env(5);
  Rng rng(99);
  std::vector<double> action(2);

  Observation a = env1.reset(42);
  Observation b = env2.reset(42);
  for (int t = 0; t < 400; ++t) {
    action[0] = rng.uniform(-0.2, 1.2);
    action[1] = rng.uniform(-0.2, 1.2);
    const StepResult ra = env1.step(action);
    const StepResult rb = env2.step(action);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.done == rb.done);
    REQUIRE(ra.observation.size() == rb.observation.size());
    for (std::size_t i = 0; i < ra.observation.size(); ++i) {
      CHECK(ra.observation[i] == rb.observation[i]);
    }
    if (ra.done) {
      env1.reset();
      env2.reset();
    }
  }
}

TEST_CASE("rewards and observations stay finite under bounded actions") {
  PpmcEnv env = make_env(21);
  env.reset(21);
  Rng rng(77);
  std::vector<double> action(2);
  for (int t = 0; t < 5000; ++t) {
    action[0] = rng.uniform();
    action[1] = rng.uniform();
    const StepResult result = env.step(action);
    CHECK(std::isfinite(result.reward));
    for (double v : result.observation) {
      CHECK(std::isfinite(v));
      CHECK(std::abs(v) <= 1.0);
    }
    if (result.done) {
      env.reset();
    }
  }
}

TEST_CASE("step result carries the required diagnostic keys") {
  PpmcEnv env = make_env();
  env.reset(7);
  const StepResult result = env.step(std::vector<double>{0.4, 0.6});
  CHECK(result.info.count("progress") == 1);
  CHECK(result.info.count("yaw_rate") == 1);
  CHECK(result.info.count("distance_to_goal") == 1);
}

TEST_CASE("registry resolves ppmc and rejects unknown names") {
  register_builtin_tasks();
  EnvRegistry& registry = EnvRegistry::instance();
  CHECK(registry.contains("ppmc"));

  auto env = registry.make("ppmc", nlohmann::json::object(), 12);
  REQUIRE(env != nullptr);
  CHECK(env->observation_spec().dim == 9);
  CHECK(env->action_spec().dim == 2);

  try {
    registry.make("nope", nlohmann::json::object(), 0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nope") != std::string::npos);
    CHECK(msg.find("ppmc") != std::string::npos);
  }
}

TEST_CASE("spec invariants are validated") {
  ActionSpec bad{2, {0.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  ActionSpec short_bounds{2, {0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(short_bounds.validate(), ConfigError);
  ActionSpec good{2, {0.0, 0.0}, {1.0, 1.0}};
  CHECK_NOTHROW(good.validate());
}
