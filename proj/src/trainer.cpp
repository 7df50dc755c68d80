// SPDX-License-Identifier: Apache-2.0

#include "rlstar/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rlstar/bridge.hpp"
#include "rlstar/errors.hpp"
#include "rlstar/gaussian.hpp"
#include "rlstar/ppo.hpp"

namespace rlstar {

namespace {

constexpr const char* kCsvHeader =
    "update,timesteps,wall_clock_s,ep_reward_mean,ep_len_mean,success_rate,"
    "policy_loss,value_loss,entropy,approx_kl,clip_frac";

std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over a per-index offset stream.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Window {
  std::vector<EpisodeRecord> episodes;
  LossMetrics loss_sum;
  int updates = 0;

  void add(const RolloutBatch& batch, const LossMetrics& metrics) {
    episodes.insert(episodes.end(), batch.episodes.begin(),
                    batch.episodes.end());
    loss_sum.policy_loss += metrics.policy_loss;
    loss_sum.value_loss += metrics.value_loss;
    loss_sum.entropy += metrics.entropy;
    loss_sum.approx_kl += metrics.approx_kl;
    loss_sum.clip_frac += metrics.clip_frac;
    ++updates;
  }

  void clear() {
    episodes.clear();
    loss_sum = LossMetrics{};
    updates = 0;
  }
};

}  // namespace

ClockFn steady_clock_fn() {
  return [] {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

std::atomic<bool>& global_stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

std::unique_ptr<Environment> make_environment(const RunConfig& cfg,
                                              std::uint64_t env_seed) {
  register_builtin_tasks();
  if (!cfg.bridge_connect.empty()) {
    auto [host, port] = parse_address(cfg.bridge_connect);
    return std::make_unique<RemoteEnvironment>(host, port);
  }
  return EnvRegistry::instance().make(cfg.task, cfg.task_json(), env_seed);
}

Trainer::Trainer(RunConfig cfg, ClockFn clock)
    : cfg_(std::move(cfg)),
      clock_(clock ? std::move(clock) : steady_clock_fn()),
      shuffle_rng_(0) {
  register_builtin_tasks();
  cfg_.validate();

  Rng master(cfg_.seed);
  const std::uint64_t env_seed = master.split();
  const std::uint64_t init_seed = master.split();
  sample_seed_ = master.split();
  shuffle_rng_ = Rng(master.split());

  env_ = make_environment(cfg_, env_seed);
  Rng init_rng(init_seed);
  policy_ = Policy::make(env_->observation_spec().dim, env_->action_spec().dim,
                         cfg_.hidden_sizes, init_rng);
  adam_ = PolicyAdam(policy_);
}

TrainResult Trainer::train() {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg_.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + cfg_.out_dir + ": " +
                  ec.message());
  }

  const fs::path csv_path = fs::path(cfg_.out_dir) / "metrics.csv";
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) {
    throw IoError("cannot open metrics CSV for writing: " + csv_path.string());
  }
  csv << kCsvHeader << "\n";

  RolloutCollector collector(*env_, sample_seed_);
  Window window;

  const double t0 = clock_();
  double prev_wall = 0.0;
  double carry_reward = 0.0;
  double carry_length = 0.0;
  double carry_success = 0.0;

  TrainResult result;
  long long timesteps = 0;
  int updates = 0;

  while (timesteps < cfg_.train.total_timesteps) {
    if (stop_.load() || global_stop_flag().load()) {
      break;
    }
    RolloutBatch batch = collector.collect_rollout(policy_, cfg_.train.n_steps);
    compute_gae(batch, cfg_.train.gamma, cfg_.train.gae_lambda);
    const LossMetrics metrics =
        ppo_update(policy_, batch, cfg_.train, adam_, shuffle_rng_);

    timesteps += cfg_.train.n_steps;
    ++updates;
    window.add(batch, metrics);

    if (updates % cfg_.log_interval == 0) {
      double wall = clock_() - t0;
      if (wall <= prev_wall) {
        wall = prev_wall + 1e-6;  // CurvePoint wall clock strictly increases
      }
      prev_wall = wall;

      if (!window.episodes.empty()) {
        double reward = 0.0;
        double length = 0.0;
        double success = 0.0;
        for (const EpisodeRecord& e : window.episodes) {
          reward += e.reward;
          length += e.length;
          success += e.waypoints_reached >= 1 ? 1.0 : 0.0;
        }
        const double n = static_cast<double>(window.episodes.size());
        carry_reward = reward / n;
        carry_length = length / n;
        carry_success = success / n;
      }
      const double inv_updates = 1.0 / static_cast<double>(window.updates);

      char wall_buf[32];
      std::snprintf(wall_buf, sizeof wall_buf, "%.6f", wall);
      csv << updates << ',' << timesteps << ',' << wall_buf << ','
          << format_metric(carry_reward) << ',' << format_metric(carry_length)
          << ',' << format_metric(carry_success) << ','
          << format_metric(window.loss_sum.policy_loss * inv_updates) << ','
          << format_metric(window.loss_sum.value_loss * inv_updates) << ','
          << format_metric(window.loss_sum.entropy * inv_updates) << ','
          << format_metric(window.loss_sum.approx_kl * inv_updates) << ','
          << format_metric(window.loss_sum.clip_frac * inv_updates) << "\n";
      csv.flush();
      window.clear();
    }

    if (cfg_.checkpoint_interval > 0 &&
        updates % cfg_.checkpoint_interval == 0) {
      const fs::path path = fs::path(cfg_.out_dir) /
                            ("checkpoint_" + std::to_string(updates) + ".bin");
      save_checkpoint(policy_, &adam_, path);
    }
  }

  const fs::path final_path = fs::path(cfg_.out_dir) / "checkpoint_final.bin";
  save_checkpoint(policy_, &adam_, final_path);

  result.updates = updates;
  result.timesteps = timesteps;
  result.csv_path = csv_path;
  result.final_checkpoint_path = final_path;
  return result;
}

EvalReport evaluate(const std::filesystem::path& checkpoint_path,
                    const RunConfig& cfg, int episodes, std::uint64_t seed,
                    bool deterministic,
                    const std::filesystem::path& trajectory_csv) {
  EvalReport report;
  report.episodes = episodes;
  if (episodes <= 0) {
    return report;
  }

  std::unique_ptr<Environment> env = make_environment(cfg, seed);
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Policy& policy = ckpt.policy;
  if (policy.obs_dim() != env->observation_spec().dim ||
      policy.act_dim() != env->action_spec().dim) {
    throw ShapeMismatch(
        "checkpoint networks do not match the environment: checkpoint " +
        std::to_string(policy.obs_dim()) + "->" +
        std::to_string(policy.act_dim()) + ", environment " +
        std::to_string(env->observation_spec().dim) + "->" +
        std::to_string(env->action_spec().dim));
  }

  std::ofstream traj;
  const bool dump = !trajectory_csv.empty();
  if (dump) {
    traj.open(trajectory_csv, std::ios::trunc);
    if (!traj) {
      throw IoError("cannot open trajectory CSV for writing: " +
                    trajectory_csv.string());
    }
    traj << "episode,step";
    for (int i = 0; i < env->observation_spec().dim; ++i) {
      traj << ",obs" << i;
    }
    for (int i = 0; i < env->action_spec().dim; ++i) {
      traj << ",act" << i;
    }
    traj << ",reward,done\n";
  }

  const int act_dim = env->action_spec().dim;
  constexpr int kMaxEpisodeSteps = 1'000'000;

  double total_reward = 0.0;
  double total_length = 0.0;
  int successes = 0;
  int double_successes = 0;
  long long steps_to_first_sum = 0;

  Mlp::Cache actor_cache;
  std::vector<double> action(act_dim);

  for (int ep = 0; ep < episodes; ++ep) {
    const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(ep));
    Rng sample_rng(mix_seed(ep_seed, 1));
    Observation obs = env->reset(ep_seed);

    double ep_reward = 0.0;
    int ep_steps = 0;
    int first_waypoint_step = -1;
    int waypoints = 0;

    for (int t = 0; t < kMaxEpisodeSteps; ++t) {
      policy.actor.forward_batch(obs, 1, actor_cache);
      for (int d = 0; d < act_dim; ++d) {
        action[d] = actor_cache.outputs[d];
        if (!deterministic) {
          action[d] += std::exp(policy.log_std[d]) * sample_rng.normal();
        }
      }
      StepResult step = env->step(action);
      ep_reward += step.reward;
      ++ep_steps;

      auto it = step.info.find("waypoints_reached");
      if (it != step.info.end()) {
        const int reached = static_cast<int>(it->second);
        if (reached >= 1 && first_waypoint_step < 0) {
          first_waypoint_step = ep_steps;
        }
        waypoints = reached;
      }

      if (dump) {
        traj << ep << ',' << ep_steps;
        for (double v : step.observation) {
          traj << ',' << format_metric(v);
        }
        for (double v : action) {
          traj << ',' << format_metric(v);
        }
        traj << ',' << format_metric(step.reward) << ','
             << (step.done ? 1 : 0) << "\n";
      }

      if (step.done) {
        break;
      }
      obs = std::move(step.observation);
    }

    total_reward += ep_reward;
    total_length += ep_steps;
    if (waypoints >= 1) {
      ++successes;
      steps_to_first_sum += first_waypoint_step;
    }
    if (waypoints >= 2) {
      ++double_successes;
    }
  }

  const double n = static_cast<double>(episodes);
  report.success_rate = successes / n;
  report.double_success_rate = double_successes / n;
  report.mean_reward = total_reward / n;
  report.mean_length = total_length / n;
  report.mean_steps_to_first =
      successes > 0 ? static_cast<double>(steps_to_first_sum) / successes : 0.0;
  return report;
}

}  // namespace rlstar
