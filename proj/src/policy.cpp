// SPDX-License-Identifier: Apache-2.0

#include "rlstar/policy.hpp"

#include <algorithm>
#include <cmath>

namespace rlstar {

Policy Policy::make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                    Rng& rng) {
  std::vector<int> actor_sizes;
  actor_sizes.push_back(obs_dim);
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  actor_sizes.push_back(act_dim);

  std::vector<int> critic_sizes = actor_sizes;
  critic_sizes.back() = 1;

  Policy policy;
  policy.actor = Mlp(actor_sizes);
  policy.actor.init_uniform(rng);
  policy.log_std.assign(static_cast<std::size_t>(act_dim), 0.0);
  policy.critic = Mlp(critic_sizes);
  policy.critic.init_uniform(rng);
  return policy;
}

void PolicyGrads::zero() {
  std::fill(actor.begin(), actor.end(), 0.0);
  std::fill(log_std.begin(), log_std.end(), 0.0);
  std::fill(critic.begin(), critic.end(), 0.0);
}

double PolicyGrads::global_norm() const {
  double sum = 0.0;
  for (double g : actor) sum += g * g;
  for (double g : log_std) sum += g * g;
  for (double g : critic) sum += g * g;
  return std::sqrt(sum);
}

void PolicyGrads::scale(double factor) {
  for (double& g : actor) g *= factor;
  for (double& g : log_std) g *= factor;
  for (double& g : critic) g *= factor;
}

double clip_global_norm(PolicyGrads& grads, double max_norm) {
  const double norm = grads.global_norm();
  if (norm > max_norm) {
    grads.scale(max_norm / norm);
  }
  return norm;
}

double clip_global_norm(std::span<double> grads, double max_norm) {
  double sum = 0.0;
  for (double g : grads) sum += g * g;
  const double norm = std::sqrt(sum);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (double& g : grads) g *= factor;
  }
  return norm;
}

void PolicyAdam::step(Policy& policy, const PolicyGrads& grads, double lr) {
  adam_step(actor, policy.actor.params(), grads.actor, lr);
  adam_step(log_std, policy.log_std, grads.log_std, lr);
  adam_step(critic, policy.critic.params(), grads.critic, lr);
}

}  // namespace rlstar
