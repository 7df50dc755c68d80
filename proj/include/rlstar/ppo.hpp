// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_PPO_HPP_
#define RLSTAR_PPO_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "rlstar/env.hpp"
#include "rlstar/policy.hpp"
#include "rlstar/rng.hpp"

namespace rlstar {

struct TrainConfig {
  double learning_rate = 3e-4;
  double gamma = 0.9;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double vf_coef = 0.5;
  int n_steps = 256;
  int n_epochs = 4;
  int n_minibatches = 4;
  double clip_range = 0.2;
  double max_grad_norm = 0.5;
  long long total_timesteps = 1'000'000;

  int minibatch_size() const { return n_steps / n_minibatches; }
  void validate() const;  // throws ConfigError
};

// Stats of one finished episode, gathered during rollout collection.
struct EpisodeRecord {
  double reward = 0.0;
  int length = 0;
  int waypoints_reached = 0;
};

// Fixed-length buffer of transitions with computed advantages/returns.
struct RolloutBatch {
  int n_steps = 0;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> observations;   // n_steps x obs_dim
  std::vector<double> actions;        // n_steps x act_dim, unclamped samples
  std::vector<double> logprobs;       // n_steps
  std::vector<double> values;         // n_steps
  std::vector<double> rewards;        // n_steps
  std::vector<std::uint8_t> dones;    // n_steps; 1 when step t ended an episode
  double bootstrap_value = 0.0;       // value of the state after the last step
  std::vector<double> advantages;     // n_steps
  std::vector<double> returns;        // n_steps; advantages + values
  std::vector<EpisodeRecord> episodes;  // episodes that finished in this rollout
};

// Drives one environment with the acting policy, auto-resetting on episode
// end. Episodes continue across successive collect_rollout calls.
class RolloutCollector {
 public:
  RolloutCollector(Environment& env, std::uint64_t sample_seed);

  RolloutBatch collect_rollout(const Policy& policy, int n_steps);

 private:
  Environment* env_;
  Rng rng_;
  Observation current_obs_;
  double episode_reward_ = 0.0;
  int episode_length_ = 0;
  mutable Mlp::Cache actor_cache_;
  mutable Mlp::Cache critic_cache_;
};

// GAE(gamma, lambda):
//   delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t
//   A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
// with V beyond the buffer given by bootstrap_value. returns = A + V.
// Throws LengthMismatch when array lengths disagree.
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap_value,
                 double gamma, double lambda, std::span<double> advantages,
                 std::span<double> returns);
void compute_gae(RolloutBatch& batch, double gamma, double lambda);

// (a - mean) / (population std + 1e-8), computed over the whole update batch.
std::vector<double> normalize_advantages(std::span<const double> advantages);

struct LossMetrics {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;       // mean(logprob_old - logprob_new)
  double clip_frac = 0.0;       // fraction of samples with |ratio-1| > clip
  double max_ratio_dev = 0.0;   // max |ratio-1| over the minibatch
};

// One minibatch of an update: indices into the batch arrays plus the
// batch-wide normalized advantages.
struct MinibatchView {
  const RolloutBatch* batch = nullptr;
  std::span<const int> indices;
  std::span<const double> norm_advantages;  // indexed like the batch arrays
};

// Clipped-surrogate PPO loss on one minibatch:
//   policy: -mean(min(ratio*A, clip(ratio, 1-eps, 1+eps)*A))
//   value:  0.5*mean(max((V-ret)^2, (V_old+clip(V-V_old,-eps,eps)-ret)^2))
//   total:  policy + vf_coef*value - entropy_coef*entropy
// When grads is non-null, accumulates exact parameter gradients of `total`.
LossMetrics ppo_loss(const Policy& policy, const MinibatchView& mb,
                     const TrainConfig& cfg, PolicyGrads* grads);

// n_epochs passes of shuffled minibatches with global-norm clipping and an
// Adam step each; returns metrics averaged over all minibatches.
// Throws NonFiniteLoss if any loss component leaves the finite range.
LossMetrics ppo_update(Policy& policy, const RolloutBatch& batch,
                       const TrainConfig& cfg, PolicyAdam& adam, Rng& rng);

}  // namespace rlstar

#endif  // RLSTAR_PPO_HPP_
