// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlstar/errors.hpp"
#include "rlstar/mlp.hpp"
#include "rlstar/rng.hpp"

using namespace rlstar;

namespace {

// Scalar test loss: fixed random linear combination of the outputs.
double weighted_output(const Mlp& net, std::span<const double> inputs,
                       int batch, const std::vector<double>& coefs) {
  Mlp::Cache cache;
  net.forward_batch(inputs, batch, cache);
  double loss = 0.0;
  for (std::size_t i = 0; i < cache.outputs.size(); ++i) {
    loss += coefs[i] * cache.outputs[i];
  }
  return loss;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST_CASE("zero parameters give a zero output") {
  Mlp net(std::vector<int>{3, 4, 2});
  const std::vector<double> out = net.forward(std::vector<double>{0.5, -1.0, 2.0});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("single linear layer with unit weight is the identity") {
  Mlp net(std::vector<int>{1, 1});
  net.weight(0)[0] = 1.0;
  for (double x : {-2.0, 0.0, 0.7, 3.5}) {
    CHECK(net.forward(std::vector<double>{x})[0] == x);
  }
}

TEST_CASE("1-1-1 net with unit parameters applies one tanh") {
  Mlp net(std::vector<int>{1, 1, 1});
  net.weight(0)[0] = 1.0;
  net.weight(1)[0] = 1.0;
  const double out = net.forward(std::vector<double>{0.5})[0];
  CHECK(out == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(out == doctest::Approx(0.46211715726000974).epsilon(1e-12));
}

TEST_CASE("forward is bit-deterministic") {
  Rng rng(3);
  Mlp net(std::vector<int>{4, 8, 8, 3});
  net.init_uniform(rng);
  std::vector<double> input{0.1, -0.4, 0.9, 0.3};
  const std::vector<double> a = net.forward(input);
  const std::vector<double> b = net.forward(input);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
  }
}

TEST_CASE("batched forward equals per-sample forward bit for bit") {
  Rng rng(5);
  Mlp net(std::vector<int>{4, 6, 2});
  net.init_uniform(rng);
  const int batch = 7;
  std::vector<double> inputs(batch * 4);
  for (double& v : inputs) {
    v = rng.uniform(-1.0, 1.0);
  }
  Mlp::Cache cache;
  net.forward_batch(inputs, batch, cache);
  for (int b = 0; b < batch; ++b) {
    const std::vector<double> single = net.forward(
        std::span<const double>(inputs.data() + b * 4, 4));
    for (int o = 0; o < 2; ++o) {
      CHECK(cache.outputs[b * 2 + o] == single[o]);
    }
  }
}

TEST_CASE("wrong input length raises DimensionMismatch") {
  Mlp net(std::vector<int>{3, 2});
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("backward with a foreign cache raises CacheMismatch") {
  Rng rng(7);
  Mlp net(std::vector<int>{3, 4, 2});
  Mlp other(std::vector<int>{3, 5, 2});
  net.init_uniform(rng);
  other.init_uniform(rng);
  Mlp::Cache cache;
  other.forward_batch(std::vector<double>{0.1, 0.2, 0.3}, 1, cache);
  std::vector<double> grads(net.param_count(), 0.0);
  CHECK_THROWS_AS(
      net.backward_batch(cache, std::vector<double>{1.0, 0.0}, grads),
      CacheMismatch);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  Rng rng(9);
  Mlp net(std::vector<int>{3, 6, 2});
  net.init_uniform(rng);
  Mlp::Cache cache;
  net.forward_batch(std::vector<double>{0.5, -0.5, 0.25}, 1, cache);
  std::vector<double> grads(net.param_count(), 0.0);
  net.backward_batch(cache, std::vector<double>{0.0, 0.0}, grads);
  for (double g : grads) {
    CHECK(g == 0.0);
  }
}

TEST_CASE("linear net gradient of the output is the input") {
  Mlp net(std::vector<int>{1, 1});
  net.weight(0)[0] = 0.3;
  Mlp::Cache cache;
  const double x = 1.7;
  net.forward_batch(std::vector<double>{x}, 1, cache);
  std::vector<double> grads(net.param_count(), 0.0);
  net.backward_batch(cache, std::vector<double>{1.0}, grads);
  CHECK(grads[0] == x);   // d(out)/dw
  CHECK(grads[1] == 1.0); // d(out)/db
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(1234);
  const std::vector<std::vector<int>> shapes = {
      {2, 3}, {3, 5, 2}, {4, 8, 8, 3}, {5, 7, 6, 1}};
  for (const auto& shape : shapes) {
    CAPTURE(shape.front());
    Mlp net(shape);
    net.init_uniform(rng);
    const int batch = 3;
    std::vector<double> inputs(static_cast<std::size_t>(batch) * shape.front());
    for (double& v : inputs) {
      v = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> coefs(static_cast<std::size_t>(batch) * shape.back());
    for (double& c : coefs) {
      c = rng.uniform(-1.0, 1.0);
    }

    Mlp::Cache cache;
    net.forward_batch(inputs, batch, cache);
    std::vector<double> grads(net.param_count(), 0.0);
    net.backward_batch(cache, coefs, grads);

    const double h = 1e-5;
    auto params = net.params();
    for (std::size_t p = 0; p < net.param_count(); ++p) {
      const double saved = params[p];
      params[p] = saved + h;
      const double up = weighted_output(net, inputs, batch, coefs);
      params[p] = saved - h;
      const double down = weighted_output(net, inputs, batch, coefs);
      params[p] = saved;
      const double fd = (up - down) / (2.0 * h);
      CHECK(relative_error(grads[p], fd) < 1e-4);
    }
  }
}

TEST_CASE("input gradients match finite differences") {
  Rng rng(4321);
  Mlp net(std::vector<int>{3, 6, 4, 2});
  net.init_uniform(rng);
  const int batch = 2;
  std::vector<double> inputs{0.3, -0.7, 0.2, 0.9, 0.1, -0.5};
  std::vector<double> coefs{0.5, -1.0, 0.8, 0.25};

  Mlp::Cache cache;
  net.forward_batch(inputs, batch, cache);
  std::vector<double> grads(net.param_count(), 0.0);
  std::vector<double> input_grads(inputs.size(), 0.0);
  net.backward_batch(cache, coefs, grads, input_grads);

  const double h = 1e-5;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double saved = inputs[i];
    inputs[i] = saved + h;
    const double up = weighted_output(net, inputs, batch, coefs);
    inputs[i] = saved - h;
    const double down = weighted_output(net, inputs, batch, coefs);
    inputs[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(relative_error(input_grads[i], fd) < 1e-4);
  }
}

TEST_CASE("init_uniform respects the fan-in bound and zero biases") {
  Rng rng(55);
  Mlp net(std::vector<int>{9, 16, 2});
  net.init_uniform(rng);
  const double bound0 = std::sqrt(1.0 / 9.0);
  for (double w : net.weight(0)) {
    CHECK(std::abs(w) <= bound0);
  }
  for (double b : net.bias(0)) {
    CHECK(b == 0.0);
  }
  const double bound1 = std::sqrt(1.0 / 16.0);
  for (double w : net.weight(1)) {
    CHECK(std::abs(w) <= bound1);
  }
}
