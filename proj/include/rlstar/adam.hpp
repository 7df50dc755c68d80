// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_ADAM_HPP_
#define RLSTAR_ADAM_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace rlstar {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-5;
};

// First/second-moment accumulators for one flat parameter block.
struct AdamState {
  AdamState() = default;
  explicit AdamState(std::size_t n, AdamConfig config = {})
      : m(n, 0.0), v(n, 0.0), cfg(config) {}

  std::vector<double> m;
  std::vector<double> v;
  long long step_count = 0;
  AdamConfig cfg;
};

// One bias-corrected Adam update:
//   m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
//   p <- p - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
// Throws ShapeMismatch when sizes disagree.
void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, double lr);

}  // namespace rlstar

#endif  // RLSTAR_ADAM_HPP_
