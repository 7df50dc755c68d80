// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_POLICY_HPP_
#define RLSTAR_POLICY_HPP_

#include <span>
#include <vector>

#include "rlstar/adam.hpp"
#include "rlstar/mlp.hpp"
#include "rlstar/rng.hpp"

namespace rlstar {

// Actor network (observation -> action means), state-independent action
// log standard deviations, and a separate critic network (observation -> value).
struct Policy {
  Mlp actor;
  std::vector<double> log_std;
  Mlp critic;

  static Policy make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                     Rng& rng);

  int obs_dim() const { return actor.input_dim(); }
  int act_dim() const { return actor.output_dim(); }
  std::size_t param_count() const {
    return actor.param_count() + log_std.size() + critic.param_count();
  }
};

// Gradients shaped like a Policy's parameters.
struct PolicyGrads {
  std::vector<double> actor;
  std::vector<double> log_std;
  std::vector<double> critic;

  PolicyGrads() = default;
  explicit PolicyGrads(const Policy& policy)
      : actor(policy.actor.param_count(), 0.0),
        log_std(policy.log_std.size(), 0.0),
        critic(policy.critic.param_count(), 0.0) {}

  void zero();
  double global_norm() const;
  void scale(double factor);
};

// Scale gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(PolicyGrads& grads, double max_norm);
double clip_global_norm(std::span<double> grads, double max_norm);

// Adam accumulators for the three parameter blocks; stepped together.
struct PolicyAdam {
  AdamState actor;
  AdamState log_std;
  AdamState critic;

  PolicyAdam() = default;
  explicit PolicyAdam(const Policy& policy, AdamConfig cfg = {})
      : actor(policy.actor.param_count(), cfg),
        log_std(policy.log_std.size(), cfg),
        critic(policy.critic.param_count(), cfg) {}

  void step(Policy& policy, const PolicyGrads& grads, double lr);
};

}  // namespace rlstar

#endif  // RLSTAR_POLICY_HPP_
