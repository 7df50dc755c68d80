// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_TRAINER_HPP_
#define RLSTAR_TRAINER_HPP_

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "rlstar/checkpoint.hpp"
#include "rlstar/config.hpp"

namespace rlstar {

// Injectable time source; seconds since an arbitrary origin. The default
// uses the steady clock. Tests inject a deterministic clock so metrics
// files are byte-identical across runs.
using ClockFn = std::function<double()>;
ClockFn steady_clock_fn();

// Builds the run's environment: the registered task, or a remote one when
// bridge_connect is set.
std::unique_ptr<Environment> make_environment(const RunConfig& cfg,
                                              std::uint64_t env_seed);

struct TrainResult {
  int updates = 0;
  long long timesteps = 0;
  std::filesystem::path csv_path;
  std::filesystem::path final_checkpoint_path;
};

// Process-wide stop flag; safe to set from a signal handler.
std::atomic<bool>& global_stop_flag();

// Drives collect/update cycles until total_timesteps are consumed, writing
// a metrics CSV point every log_interval updates (averaged over that
// window), periodic checkpoints, and a final checkpoint. A run is fully
// determined by (config, seed).
class Trainer {
 public:
  explicit Trainer(RunConfig cfg, ClockFn clock = {});

  TrainResult train();

  void request_stop() { stop_.store(true); }

  const Policy& policy() const { return policy_; }
  const RunConfig& config() const { return cfg_; }

 private:
  RunConfig cfg_;
  ClockFn clock_;
  std::unique_ptr<Environment> env_;
  Policy policy_;
  PolicyAdam adam_;
  Rng shuffle_rng_;
  std::uint64_t sample_seed_ = 0;
  std::atomic<bool> stop_{false};
};

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;         // fraction reaching at least one waypoint
  double double_success_rate = 0.0;  // fraction reaching two
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_steps_to_first = 0.0;  // over successful episodes
};

// Runs N episodes with the checkpointed policy, acting on the mean when
// deterministic, sampling otherwise. Episode seeds derive from (seed,
// episode index) so the report does not depend on scheduling. Optionally
// dumps per-step trajectories as CSV.
EvalReport evaluate(const std::filesystem::path& checkpoint_path,
                    const RunConfig& cfg, int episodes, std::uint64_t seed,
                    bool deterministic,
                    const std::filesystem::path& trajectory_csv = {});

}  // namespace rlstar

#endif  // RLSTAR_TRAINER_HPP_
