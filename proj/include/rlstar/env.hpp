// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_ENV_HPP_
#define RLSTAR_ENV_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace rlstar {

using Observation = std::vector<double>;

// Bounds of the action vector accepted by step(), before any task-level
// scaling. Components outside [low, high] are clamped by the environment.
struct ActionSpec {
  int dim = 0;
  std::vector<double> low;
  std::vector<double> high;

  void validate() const;  // throws ConfigError on broken invariants
};

// Bounds of the normalized observation vector.
struct ObservationSpec {
  int dim = 0;
  std::vector<double> low;
  std::vector<double> high;

  void validate() const;
};

// The per-timestep packet crossing the agent/environment boundary.
struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

// Abstract environment contract: reset/step plus space introspection.
// A single instance is single-threaded; independent instances share nothing.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const ActionSpec& action_spec() const = 0;
  virtual const ObservationSpec& observation_spec() const = 0;

  // Begin a new episode. With a seed the episode is fully determined by it;
  // without one the environment's persistent random stream is used.
  virtual Observation reset(std::optional<std::uint64_t> seed = std::nullopt) = 0;

  // Advance exactly one control timestep.
  // Throws ActionDimensionMismatch on a wrong-length action and
  // EpisodeFinished when called after done without an intervening reset.
  virtual StepResult step(std::span<const double> action) = 0;
};

// Maps task names to environment constructors so the runner can select
// tasks by name. Factories receive the merged task configuration as JSON.
using EnvFactory = std::function<std::unique_ptr<Environment>(
    const nlohmann::json& config, std::uint64_t seed)>;

class EnvRegistry {
 public:
  static EnvRegistry& instance();

  void register_task(const std::string& name, EnvFactory factory);

  // Throws ConfigError naming the unknown task and listing registered ones.
  std::unique_ptr<Environment> make(const std::string& name,
                                    const nlohmann::json& config,
                                    std::uint64_t seed) const;

  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, EnvFactory> factories_;
};

}  // namespace rlstar

#endif  // RLSTAR_ENV_HPP_
