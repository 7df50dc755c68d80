// SPDX-License-Identifier: Apache-2.0

#include "rlstar/env.hpp"

#include <sstream>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

void validate_box(int dim, const std::vector<double>& low,
                  const std::vector<double>& high, const char* what) {
  if (dim <= 0) {
    throw ConfigError(std::string(what) + ": dim must be positive");
  }
  if (low.size() != static_cast<std::size_t>(dim) ||
      high.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError(std::string(what) + ": bounds length must equal dim");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(low[i] < high[i])) {
      throw ConfigError(std::string(what) + ": low must be strictly below high");
    }
  }
}

}  // namespace

void ActionSpec::validate() const { validate_box(dim, low, high, "ActionSpec"); }

void ObservationSpec::validate() const {
  validate_box(dim, low, high, "ObservationSpec");
}

EnvRegistry& EnvRegistry::instance() {
  static EnvRegistry registry;
  return registry;
}

void EnvRegistry::register_task(const std::string& name, EnvFactory factory) {
  const std::lock_guard<std::mutex> lock(mutex_);
  factories_[name] = std::move(factory);
}

bool EnvRegistry::contains(const std::string& name) const {
  const std::lock_guard<std::mutex> lock(mutex_);
  return factories_.count(name) > 0;
}

std::vector<std::string> EnvRegistry::names() const {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> out;
  out.reserve(factories_.size());
  for (const auto& [name, _] : factories_) {
    out.push_back(name);
  }
  return out;
}

std::unique_ptr<Environment> EnvRegistry::make(const std::string& name,
                                               const nlohmann::json& config,
                                               std::uint64_t seed) const {
  EnvFactory factory;
  {
    const std::lock_guard<std::mutex> lock(mutex_);
    auto it = factories_.find(name);
    if (it != factories_.end()) {
      factory = it->second;
    }
  }
  if (!factory) {
    std::ostringstream msg;
    msg << "unknown task \"" << name << "\"; registered tasks:";
    for (const auto& known : names()) {
      msg << " " << known;
    }
    throw ConfigError(msg.str());
  }
  return factory(config, seed);
}

}  // namespace rlstar
