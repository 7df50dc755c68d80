// SPDX-License-Identifier: Apache-2.0

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rlstar/bridge.hpp"
#include "rlstar/errors.hpp"
#include "rlstar/trainer.hpp"

namespace {

void handle_signal(int) { rlstar::global_stop_flag().store(true); }

void print_report(const rlstar::EvalReport& report) {
  std::printf("episodes:            %d\n", report.episodes);
  std::printf("success_rate:        %.4f\n", report.success_rate);
  std::printf("double_success_rate: %.4f\n", report.double_success_rate);
  std::printf("mean_reward:         %.4f\n", report.mean_reward);
  std::printf("mean_length:         %.2f\n", report.mean_length);
  std::printf("mean_steps_to_first: %.2f\n", report.mean_steps_to_first);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rlstar: train and evaluate a PPO agent on the waypoint rover task, "
      "or bridge environments over TCP"};

  std::string config_path;
  std::string task;
  std::string algo;
  long long timesteps = -1;
  std::int64_t seed = -1;
  std::string out_dir;
  int eval_episodes = -1;
  std::string checkpoint_path;
  bool deterministic = false;
  std::string traj_out;
  std::string bridge_listen;
  std::string bridge_connect;

  app.add_option("--config", config_path, "JSON run configuration file");
  app.add_option("--task", task, "task name (overrides config)");
  app.add_option("--algo", algo, "algorithm name (overrides config)");
  app.add_option("--timesteps", timesteps, "total training timesteps");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--eval", eval_episodes,
                 "evaluate a checkpoint over N episodes instead of training");
  app.add_option("--checkpoint", checkpoint_path, "checkpoint file for --eval");
  app.add_flag("--deterministic", deterministic,
               "evaluate with the policy mean instead of sampling");
  app.add_option("--traj-out", traj_out,
                 "write per-step evaluation trajectories to this CSV");
  app.add_option("--bridge-listen", bridge_listen,
                 "serve the configured task environment on host:port");
  app.add_option("--bridge-connect", bridge_connect,
                 "use a remote environment at host:port");

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  try {
    rlstar::register_builtin_tasks();

    rlstar::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = rlstar::load_run_config(config_path);
    }
    if (!task.empty()) cfg.task = task;
    if (!algo.empty()) cfg.algo = algo;
    if (timesteps >= 0) cfg.train.total_timesteps = timesteps;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!bridge_connect.empty()) cfg.bridge_connect = bridge_connect;

    if (!bridge_listen.empty()) {
      cfg.validate();
      auto [host, port] = rlstar::parse_address(bridge_listen);
      auto env = rlstar::make_environment(cfg, cfg.seed);
      rlstar::BridgeServer server(*env, host, port);
      std::printf("serving task \"%s\" on %s:%d\n", cfg.task.c_str(),
                  host.c_str(), server.port());
      std::fflush(stdout);
      server.run();
      return 0;
    }

    if (eval_episodes >= 0) {
      if (checkpoint_path.empty()) {
        throw rlstar::ConfigError("--eval requires --checkpoint");
      }
      cfg.validate();
      const rlstar::EvalReport report = rlstar::evaluate(
          checkpoint_path, cfg, eval_episodes,
          seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed,
          deterministic, traj_out);
      print_report(report);
      return 0;
    }

    rlstar::Trainer trainer(cfg);
    const rlstar::TrainResult result = trainer.train();
    std::printf("trained %d updates (%lld timesteps)\n", result.updates,
                result.timesteps);
    std::printf("metrics: %s\n", result.csv_path.c_str());
    std::printf("checkpoint: %s\n", result.final_checkpoint_path.c_str());
    return 0;
  } catch (const rlstar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rlstar::NonFiniteLoss& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const rlstar::CheckpointFormatError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const rlstar::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const rlstar::ConnectError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const rlstar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
