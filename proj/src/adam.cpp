// SPDX-License-Identifier: Apache-2.0

#include "rlstar/adam.hpp"

#include <cmath>

#include "rlstar/errors.hpp"

namespace rlstar {

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ShapeMismatch("adam_step: parameter/gradient/state sizes disagree");
  }
  state.step_count += 1;
  const double b1 = state.cfg.beta1;
  const double b2 = state.cfg.beta2;
  const double eps = state.cfg.epsilon;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.step_count));

  double* m = state.m.data();
  double* v = state.v.data();
  double* p = params.data();
  const double* g = grads.data();
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace rlstar
