// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_CONFIG_HPP_
#define RLSTAR_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rlstar/ppmc.hpp"
#include "rlstar/ppo.hpp"
#include "rlstar/rover.hpp"

namespace rlstar {

// Everything a run needs: task and algorithm selection, all module
// configuration blocks, the seed that fully determines the run, and output
// plumbing. Serialized as one JSON document with one section per block.
struct RunConfig {
  std::string task = "ppmc";
  std::string algo = "ppo";
  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";
  int log_interval = 5;          // updates per metrics CSV point
  int checkpoint_interval = 1000;  // updates between periodic checkpoints
  TrainConfig train;
  TaskConfig task_config;
  RoverParams rover;
  std::vector<int> hidden_sizes = {64, 128, 164, 128, 64};
  std::string bridge_connect;  // host:port of a remote simulator, or empty

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // The section handed to environment factories.
  nlohmann::json task_json() const;

  // Throws ConfigError on invalid values or unresolved task/algo names.
  // register_builtin_tasks() must have run.
  void validate() const;
};

// Parse a config file; throws ConfigError on malformed JSON or unknown keys,
// IoError when unreadable.
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::string> registered_algorithms();

}  // namespace rlstar

#endif  // RLSTAR_CONFIG_HPP_
