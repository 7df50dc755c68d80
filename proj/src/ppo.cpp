// SPDX-License-Identifier: Apache-2.0

#include "rlstar/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rlstar/errors.hpp"
#include "rlstar/gaussian.hpp"

namespace rlstar {

void TrainConfig::validate() const {
  if (n_steps < 1 || n_minibatches < 1 || n_epochs < 1) {
    throw ConfigError("train: n_steps, n_epochs, n_minibatches must be >= 1");
  }
  if (n_steps % n_minibatches != 0) {
    throw ConfigError("train: n_steps must be divisible by n_minibatches");
  }
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw ConfigError("train: gamma must be in (0, 1]");
  }
  if (gae_lambda < 0.0 || gae_lambda > 1.0) {
    throw ConfigError("train: gae_lambda must be in [0, 1]");
  }
  if (!(clip_range > 0.0)) {
    throw ConfigError("train: clip_range must be positive");
  }
  if (!(learning_rate > 0.0) || !(max_grad_norm > 0.0)) {
    throw ConfigError("train: learning_rate and max_grad_norm must be positive");
  }
  if (entropy_coef < 0.0 || vf_coef < 0.0) {
    throw ConfigError("train: loss coefficients must be nonnegative");
  }
  if (total_timesteps < 1) {
    throw ConfigError("train: total_timesteps must be positive");
  }
}

RolloutCollector::RolloutCollector(Environment& env, std::uint64_t sample_seed)
    : env_(&env), rng_(sample_seed) {}

RolloutBatch RolloutCollector::collect_rollout(const Policy& policy,
                                               int n_steps) {
  if (n_steps < 1) {
    throw ConfigError("collect_rollout: n_steps must be >= 1");
  }
  const int obs_dim = env_->observation_spec().dim;
  const int act_dim = env_->action_spec().dim;

  RolloutBatch batch;
  batch.n_steps = n_steps;
  batch.obs_dim = obs_dim;
  batch.act_dim = act_dim;
  batch.observations.resize(static_cast<std::size_t>(n_steps) * obs_dim);
  batch.actions.resize(static_cast<std::size_t>(n_steps) * act_dim);
  batch.logprobs.resize(n_steps);
  batch.values.resize(n_steps);
  batch.rewards.resize(n_steps);
  batch.dones.resize(n_steps);

  if (current_obs_.empty()) {
    current_obs_ = env_->reset();
  }

  std::vector<double> action(act_dim);
  for (int t = 0; t < n_steps; ++t) {
    std::copy(current_obs_.begin(), current_obs_.end(),
              batch.observations.begin() +
                  static_cast<std::size_t>(t) * obs_dim);

    policy.actor.forward_batch(current_obs_, 1, actor_cache_);
    policy.critic.forward_batch(current_obs_, 1, critic_cache_);
    const std::vector<double>& mean = actor_cache_.outputs;
    for (int d = 0; d < act_dim; ++d) {
      action[d] = mean[d] + std::exp(policy.log_std[d]) * rng_.normal();
    }
    const double logprob = gaussian_logprob(mean, policy.log_std, action);

    StepResult step = env_->step(action);

    std::copy(action.begin(), action.end(),
              batch.actions.begin() + static_cast<std::size_t>(t) * act_dim);
    batch.logprobs[t] = logprob;
    batch.values[t] = critic_cache_.outputs[0];
    batch.rewards[t] = step.reward;
    batch.dones[t] = step.done ? 1 : 0;

    episode_reward_ += step.reward;
    episode_length_ += 1;

    if (step.done) {
      EpisodeRecord record;
      record.reward = episode_reward_;
      record.length = episode_length_;
      auto it = step.info.find("waypoints_reached");
      record.waypoints_reached =
          it == step.info.end() ? 0 : static_cast<int>(it->second);
      batch.episodes.push_back(record);
      episode_reward_ = 0.0;
      episode_length_ = 0;
      current_obs_ = env_->reset();
    } else {
      current_obs_ = std::move(step.observation);
    }
  }

  policy.critic.forward_batch(current_obs_, 1, critic_cache_);
  batch.bootstrap_value = critic_cache_.outputs[0];
  return batch;
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap_value,
                 double gamma, double lambda, std::span<double> advantages,
                 std::span<double> returns) {
  const std::size_t n = rewards.size();
  if (n == 0 || values.size() != n || dones.size() != n ||
      advantages.size() != n || returns.size() != n) {
    throw LengthMismatch("compute_gae: array lengths disagree");
  }
  double next_advantage = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double delta =
        rewards[t] + gamma * not_done * next_value - values[t];
    next_advantage = delta + gamma * lambda * not_done * next_advantage;
    advantages[t] = next_advantage;
    returns[t] = next_advantage + values[t];
  }
}

void compute_gae(RolloutBatch& batch, double gamma, double lambda) {
  batch.advantages.resize(batch.rewards.size());
  batch.returns.resize(batch.rewards.size());
  compute_gae(batch.rewards, batch.values, batch.dones, batch.bootstrap_value,
              gamma, lambda, batch.advantages, batch.returns);
}

std::vector<double> normalize_advantages(std::span<const double> advantages) {
  const std::size_t n = advantages.size();
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double denom = std::sqrt(var) + 1e-8;

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (advantages[i] - mean) / denom;
  }
  return out;
}

LossMetrics ppo_loss(const Policy& policy, const MinibatchView& mb,
                     const TrainConfig& cfg, PolicyGrads* grads) {
  const RolloutBatch& batch = *mb.batch;
  const int m = static_cast<int>(mb.indices.size());
  const int obs_dim = batch.obs_dim;
  const int act_dim = batch.act_dim;
  const double eps = cfg.clip_range;
  const double inv_m = 1.0 / static_cast<double>(m);

  std::vector<double> mb_obs(static_cast<std::size_t>(m) * obs_dim);
  for (int i = 0; i < m; ++i) {
    const int idx = mb.indices[i];
    std::copy_n(batch.observations.begin() +
                    static_cast<std::size_t>(idx) * obs_dim,
                obs_dim, mb_obs.begin() + static_cast<std::size_t>(i) * obs_dim);
  }

  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  policy.actor.forward_batch(mb_obs, m, actor_cache);
  policy.critic.forward_batch(mb_obs, m, critic_cache);
  const std::vector<double>& means = actor_cache.outputs;
  const std::vector<double>& values = critic_cache.outputs;

  std::vector<double> inv_sigma(act_dim);
  for (int d = 0; d < act_dim; ++d) {
    inv_sigma[d] = std::exp(-policy.log_std[d]);
  }
  const double entropy = gaussian_entropy(policy.log_std);
  // Same accumulation order as gaussian_logprob so that recomputing the
  // acting policy's logprob reproduces the stored one bit for bit.
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  std::vector<double> dmean;
  std::vector<double> dvalue;
  if (grads != nullptr) {
    dmean.assign(static_cast<std::size_t>(m) * act_dim, 0.0);
    dvalue.assign(m, 0.0);
  }

  LossMetrics metrics;
  metrics.entropy = entropy;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  int clipped_count = 0;
  double max_ratio_dev = 0.0;

  for (int i = 0; i < m; ++i) {
    const int idx = mb.indices[i];
    const double* action =
        batch.actions.data() + static_cast<std::size_t>(idx) * act_dim;
    const double* mean = means.data() + static_cast<std::size_t>(i) * act_dim;

    double logprob = 0.0;
    for (int d = 0; d < act_dim; ++d) {
      const double z = (action[d] - mean[d]) * inv_sigma[d];
      logprob += -0.5 * z * z - policy.log_std[d] - half_log_2pi;
    }

    const double ratio = std::exp(logprob - batch.logprobs[idx]);
    const double adv = mb.norm_advantages[idx];
    const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double s_unclipped = ratio * adv;
    const double s_clipped = clipped_ratio * adv;
    const bool use_unclipped = s_unclipped <= s_clipped;
    policy_loss -= std::min(s_unclipped, s_clipped);

    approx_kl += batch.logprobs[idx] - logprob;
    const double ratio_dev = std::abs(ratio - 1.0);
    max_ratio_dev = std::max(max_ratio_dev, ratio_dev);
    if (ratio_dev > eps) {
      ++clipped_count;
    }

    const double v = values[i];
    const double v_old = batch.values[idx];
    const double ret = batch.returns[idx];
    const double v_clipped = v_old + std::clamp(v - v_old, -eps, eps);
    const double sq_unclipped = (v - ret) * (v - ret);
    const double sq_clipped = (v_clipped - ret) * (v_clipped - ret);
    const bool value_use_unclipped = sq_unclipped >= sq_clipped;
    value_loss += std::max(sq_unclipped, sq_clipped);

    if (grads != nullptr) {
      // d(total)/d(logprob): only the selected, non-saturated branch flows.
      const double dloss_dlogprob =
          use_unclipped ? -inv_m * adv * ratio : 0.0;
      double* dm = dmean.data() + static_cast<std::size_t>(i) * act_dim;
      for (int d = 0; d < act_dim; ++d) {
        const double z = (action[d] - mean[d]) * inv_sigma[d];
        dm[d] = dloss_dlogprob * z * inv_sigma[d];
        grads->log_std[d] += dloss_dlogprob * (z * z - 1.0);
      }
      // The clipped branch still depends on V while the clamp is inside its
      // bounds (rounding can select it there); saturated, it is constant.
      double dvl_dv = 0.0;
      if (value_use_unclipped) {
        dvl_dv = v - ret;
      } else if (v - v_old >= -eps && v - v_old <= eps) {
        dvl_dv = v_clipped - ret;
      }
      dvalue[i] = cfg.vf_coef * inv_m * dvl_dv;
    }
  }

  policy_loss *= inv_m;
  value_loss *= 0.5 * inv_m;
  approx_kl *= inv_m;

  metrics.policy_loss = policy_loss;
  metrics.value_loss = value_loss;
  metrics.approx_kl = approx_kl;
  metrics.clip_frac = static_cast<double>(clipped_count) * inv_m;
  metrics.max_ratio_dev = max_ratio_dev;
  metrics.total =
      policy_loss + cfg.vf_coef * value_loss - cfg.entropy_coef * entropy;

  if (grads != nullptr) {
    for (int d = 0; d < act_dim; ++d) {
      grads->log_std[d] -= cfg.entropy_coef;
    }
    policy.actor.backward_batch(actor_cache, dmean, grads->actor);
    policy.critic.backward_batch(critic_cache, dvalue, grads->critic);
  }
  return metrics;
}

LossMetrics ppo_update(Policy& policy, const RolloutBatch& batch,
                       const TrainConfig& cfg, PolicyAdam& adam, Rng& rng) {
  if (batch.advantages.size() != static_cast<std::size_t>(batch.n_steps) ||
      batch.returns.size() != static_cast<std::size_t>(batch.n_steps)) {
    throw LengthMismatch("ppo_update: advantages/returns not computed");
  }
  const std::vector<double> norm_adv = normalize_advantages(batch.advantages);

  std::vector<int> indices(batch.n_steps);
  std::iota(indices.begin(), indices.end(), 0);
  const int mb_size = cfg.minibatch_size();

  PolicyGrads grads(policy);
  LossMetrics sum;
  int count = 0;
  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    shuffle(indices, rng);
    for (int start = 0; start + mb_size <= batch.n_steps; start += mb_size) {
      MinibatchView mb{&batch,
                       std::span<const int>(indices).subspan(start, mb_size),
                       norm_adv};
      grads.zero();
      const LossMetrics lm = ppo_loss(policy, mb, cfg, &grads);
      if (!std::isfinite(lm.total)) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss (policy=" << lm.policy_loss
            << " value=" << lm.value_loss << " entropy=" << lm.entropy << ")";
        throw NonFiniteLoss(msg.str());
      }
      clip_global_norm(grads, cfg.max_grad_norm);
      adam.step(policy, grads, cfg.learning_rate);

      sum.total += lm.total;
      sum.policy_loss += lm.policy_loss;
      sum.value_loss += lm.value_loss;
      sum.entropy += lm.entropy;
      sum.approx_kl += lm.approx_kl;
      sum.clip_frac += lm.clip_frac;
      sum.max_ratio_dev = std::max(sum.max_ratio_dev, lm.max_ratio_dev);
      ++count;
    }
  }

  LossMetrics mean = sum;
  const double inv = 1.0 / static_cast<double>(count);
  mean.total *= inv;
  mean.policy_loss *= inv;
  mean.value_loss *= inv;
  mean.entropy *= inv;
  mean.approx_kl *= inv;
  mean.clip_frac *= inv;
  return mean;
}

}  // namespace rlstar
