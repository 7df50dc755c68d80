// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlstar/errors.hpp"
#include "rlstar/rng.hpp"
#include "rlstar/rover.hpp"

using namespace rlstar;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("full forward command reaches 0.2 m/s with no rotation") {
  RoverParams params;
  RoverState state = reset_rover(0.0);
  RoverState next = apply_motors(state, {1.0, 1.0}, params);
  CHECK(next.v_forward == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(next.yaw_rate == 0.0);
  CHECK(next.yaw == 0.0);
  CHECK(next.v_lateral == 0.0);
}

TEST_CASE("equal motor commands never rotate") {
  RoverParams params;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform();
    RoverState state = reset_rover(rng.uniform(-kPi, kPi));
    state.x = rng.uniform(-4.0, 4.0);
    state.y = rng.uniform(-4.0, 4.0);
    RoverState next = apply_motors(state, {a, a}, params);
    CHECK(next.yaw_rate == 0.0);
    CHECK(next.yaw == state.yaw);
  }
}

TEST_CASE("single-side drive turns at v_right/track_width") {
  RoverParams params;
  params.track_width = 0.3;
  RoverState state = reset_rover(0.0);
  RoverState next = apply_motors(state, {0.0, 1.0}, params);
  CHECK(next.v_forward == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(next.yaw_rate == doctest::Approx(0.2 / 0.3).epsilon(1e-15));
}

TEST_CASE("reset_rover places the rover at the origin") {
  RoverState state = reset_rover(0.0);
  CHECK(state.x == 0.0);
  CHECK(state.y == 0.0);
  CHECK(state.yaw == 0.0);
  CHECK(state.v_forward == 0.0);
  CHECK(state.v_lateral == 0.0);
  CHECK(state.yaw_rate == 0.0);
}

TEST_CASE("reset_rover wraps the seed yaw into (-pi, pi]") {
  const RoverState a = reset_rover(3.0 * kPi);
  CHECK(std::abs(a.yaw) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(a.yaw > -kPi);
  CHECK(a.yaw <= kPi);

  // Exactly representable boundary: -pi wraps to +pi.
  CHECK(reset_rover(-kPi).yaw == kPi);
  CHECK(reset_rover(kPi).yaw == kPi);

  const RoverState b = reset_rover(-kPi / 2.0);
  CHECK(b.yaw == -kPi / 2.0);
  CHECK(b.v_forward == 0.0);
}

TEST_CASE("zero action is an exact fixed point") {
  RoverParams params;
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    RoverState state = reset_rover(rng.uniform(-kPi, kPi));
    state.x = rng.uniform(-5.0, 5.0);
    state.y = rng.uniform(-5.0, 5.0);
    RoverState next = apply_motors(state, {0.0, 0.0}, params);
    CHECK(next.x == state.x);
    CHECK(next.y == state.y);
    CHECK(next.yaw == state.yaw);
    CHECK(next.v_forward == 0.0);
    CHECK(next.yaw_rate == 0.0);
  }
}

TEST_CASE("per-step travel never exceeds max speed times dt") {
  RoverParams params;
  Rng rng(13);
  const double limit = params.max_speed() * params.dt;
  for (int i = 0; i < 500; ++i) {
    RoverState state = reset_rover(rng.uniform(-kPi, kPi));
    state.x = rng.uniform(-5.0, 5.0);
    state.y = rng.uniform(-5.0, 5.0);
    const std::array<double, 2> action{rng.uniform(), rng.uniform()};
    RoverState next = apply_motors(state, action, params);
    const double travel = std::hypot(next.x - state.x, next.y - state.y);
    CHECK(travel <= limit + 1e-15);
    CHECK(next.yaw > -kPi);
    CHECK(next.yaw <= kPi);
  }
}

TEST_CASE("swapping motor commands mirrors the turn") {
  RoverParams params;
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    RoverState state = reset_rover(0.25);
    const std::array<double, 2> action{rng.uniform(), rng.uniform()};
    const std::array<double, 2> swapped{action[1], action[0]};
    RoverState a = apply_motors(state, action, params);
    RoverState b = apply_motors(state, swapped, params);
    CHECK(a.yaw_rate == -b.yaw_rate);
    CHECK(a.v_forward == b.v_forward);
  }
}

TEST_CASE("stepping is bit-deterministic") {
  RoverParams params;
  RoverState state = reset_rover(1.0);
  state.x = 0.5;
  state.y = -0.25;
  const std::array<double, 2> action{0.3, 0.8};
  RoverState a = apply_motors(state, action, params);
  RoverState b = apply_motors(state, action, params);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.yaw == b.yaw);
  CHECK(a.v_forward == b.v_forward);
  CHECK(a.yaw_rate == b.yaw_rate);
}

TEST_CASE("wrap_angle stays in (-pi, pi]") {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    // The wrapped angle differs from the input by a multiple of 2*pi.
    const double k = std::round((a - w) / (2.0 * kPi));
    CHECK(a - w == doctest::Approx(k * 2.0 * kPi).epsilon(1e-9));
  }
}

TEST_CASE("invalid rover parameters are rejected") {
  RoverParams params;
  params.dt = 0.0;
  CHECK_THROWS_AS(params.validate(), ConfigError);
  params = RoverParams{};
  params.track_width = -1.0;
  CHECK_THROWS_AS(params.validate(), ConfigError);
}
