// SPDX-License-Identifier: Apache-2.0

#include "rlstar/gaussian.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace rlstar {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

double gaussian_logprob(std::span<const double> mean,
                        std::span<const double> log_std,
                        std::span<const double> action) {
  assert(mean.size() == log_std.size() && mean.size() == action.size());
  double logprob = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    logprob += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return logprob;
}

double gaussian_entropy(std::span<const double> log_std) {
  double entropy = 0.0;
  for (double ls : log_std) {
    entropy += 0.5 + kHalfLog2Pi + ls;
  }
  return entropy;
}

LogprobEntropy gaussian_logprob_entropy(std::span<const double> mean,
                                        std::span<const double> log_std,
                                        std::span<const double> action) {
  return {gaussian_logprob(mean, log_std, action), gaussian_entropy(log_std)};
}

}  // namespace rlstar
