// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_GAUSSIAN_HPP_
#define RLSTAR_GAUSSIAN_HPP_

#include <span>

namespace rlstar {

struct LogprobEntropy {
  double logprob = 0.0;
  double entropy = 0.0;
};

// Diagonal Gaussian density with state-independent log standard deviations.
// logprob = sum_i [-0.5*((a_i-mu_i)/sigma_i)^2 - log sigma_i - 0.5*log 2pi]
// entropy = sum_i [0.5 + 0.5*log 2pi + log sigma_i]
LogprobEntropy gaussian_logprob_entropy(std::span<const double> mean,
                                        std::span<const double> log_std,
                                        std::span<const double> action);

double gaussian_logprob(std::span<const double> mean,
                        std::span<const double> log_std,
                        std::span<const double> action);

// Depends only on the log standard deviations.
double gaussian_entropy(std::span<const double> log_std);

}  // namespace rlstar

#endif  // RLSTAR_GAUSSIAN_HPP_
