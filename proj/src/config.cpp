// SPDX-License-Identifier: Apache-2.0

#include "rlstar/config.hpp"

#include <fstream>
#include <sstream>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

void check_known_keys(const nlohmann::json& j,
                      std::initializer_list<const char*> allowed,
                      const char* context) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string(context) + ": unknown key \"" + key + "\"");
    }
  }
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  check_known_keys(j,
                   {"learning_rate", "gamma", "gae_lambda", "entropy_coef",
                    "vf_coef", "n_steps", "n_epochs", "n_minibatches",
                    "clip_range", "max_grad_norm", "total_timesteps"},
                   "train");
  TrainConfig cfg;
  try {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.gae_lambda = j.value("gae_lambda", cfg.gae_lambda);
    cfg.entropy_coef = j.value("entropy_coef", cfg.entropy_coef);
    cfg.vf_coef = j.value("vf_coef", cfg.vf_coef);
    cfg.n_steps = j.value("n_steps", cfg.n_steps);
    cfg.n_epochs = j.value("n_epochs", cfg.n_epochs);
    cfg.n_minibatches = j.value("n_minibatches", cfg.n_minibatches);
    cfg.clip_range = j.value("clip_range", cfg.clip_range);
    cfg.max_grad_norm = j.value("max_grad_norm", cfg.max_grad_norm);
    cfg.total_timesteps = j.value("total_timesteps", cfg.total_timesteps);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{{"learning_rate", cfg.learning_rate},
                        {"gamma", cfg.gamma},
                        {"gae_lambda", cfg.gae_lambda},
                        {"entropy_coef", cfg.entropy_coef},
                        {"vf_coef", cfg.vf_coef},
                        {"n_steps", cfg.n_steps},
                        {"n_epochs", cfg.n_epochs},
                        {"n_minibatches", cfg.n_minibatches},
                        {"clip_range", cfg.clip_range},
                        {"max_grad_norm", cfg.max_grad_norm},
                        {"total_timesteps", cfg.total_timesteps}};
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  check_known_keys(j,
                   {"task", "algo", "seed", "out", "log_interval",
                    "checkpoint_interval", "train", "task_config", "rover",
                    "nn", "bridge_connect"},
                   "config");
  RunConfig cfg;
  try {
    cfg.task = j.value("task", cfg.task);
    cfg.algo = j.value("algo", cfg.algo);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.log_interval = j.value("log_interval", cfg.log_interval);
    cfg.checkpoint_interval =
        j.value("checkpoint_interval", cfg.checkpoint_interval);
    cfg.bridge_connect = j.value("bridge_connect", cfg.bridge_connect);
    if (j.contains("train")) {
      cfg.train = train_config_from_json(j.at("train"));
    }
    if (j.contains("task_config")) {
      cfg.task_config = task_config_from_json(j.at("task_config"));
    }
    if (j.contains("rover")) {
      cfg.rover = rover_params_from_json(j.at("rover"));
    }
    if (j.contains("nn")) {
      check_known_keys(j.at("nn"), {"hidden_sizes"}, "nn");
      cfg.hidden_sizes = j.at("nn").value("hidden_sizes", cfg.hidden_sizes);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{{"task", task},
                        {"algo", algo},
                        {"seed", seed},
                        {"out", out_dir},
                        {"log_interval", log_interval},
                        {"checkpoint_interval", checkpoint_interval},
                        {"bridge_connect", bridge_connect},
                        {"train", train_config_to_json(train)},
                        {"task_config", task_config_to_json(task_config)},
                        {"rover", rover_params_to_json(rover)},
                        {"nn", {{"hidden_sizes", hidden_sizes}}}};
}

nlohmann::json RunConfig::task_json() const {
  return nlohmann::json{{"task_config", task_config_to_json(task_config)},
                        {"rover", rover_params_to_json(rover)}};
}

std::vector<std::string> registered_algorithms() { return {"ppo"}; }

void RunConfig::validate() const {
  bool algo_known = false;
  for (const auto& name : registered_algorithms()) {
    if (name == algo) {
      algo_known = true;
      break;
    }
  }
  if (!algo_known) {
    std::ostringstream msg;
    msg << "unknown algorithm \"" << algo << "\"; registered algorithms:";
    for (const auto& name : registered_algorithms()) {
      msg << " " << name;
    }
    throw ConfigError(msg.str());
  }
  if (bridge_connect.empty() && !EnvRegistry::instance().contains(task)) {
    std::ostringstream msg;
    msg << "unknown task \"" << task << "\"; registered tasks:";
    for (const auto& name : EnvRegistry::instance().names()) {
      msg << " " << name;
    }
    throw ConfigError(msg.str());
  }
  if (log_interval < 1) {
    throw ConfigError("log_interval must be >= 1");
  }
  if (checkpoint_interval < 0) {
    throw ConfigError("checkpoint_interval must be >= 0");
  }
  if (hidden_sizes.empty()) {
    throw ConfigError("nn: hidden_sizes must not be empty");
  }
  for (int s : hidden_sizes) {
    if (s < 1) {
      throw ConfigError("nn: hidden layer sizes must be positive");
    }
  }
  if (out_dir.empty()) {
    throw ConfigError("out directory must not be empty");
  }
  train.validate();
  task_config.validate();
  rover.validate();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError("malformed JSON in config file: " + path.string());
  }
  if (!j.is_object()) {
    throw ConfigError("config file must hold a JSON object");
  }
  return RunConfig::from_json(j);
}

}  // namespace rlstar
