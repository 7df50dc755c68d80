// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_BRIDGE_HPP_
#define RLSTAR_BRIDGE_HPP_

#include <atomic>
#include <cstdint>
#include <string>

#include "rlstar/env.hpp"

namespace rlstar {

inline constexpr int kProtocolVersion = 1;

// One complete JSON object per line, newline-terminated, UTF-8. Doubles are
// written with 17 significant digits so a parse reproduces them exactly.
std::string serialize_line(const nlohmann::json& message);

// Parse one line into a JSON object; throws Error on malformed input.
nlohmann::json parse_line(const std::string& line);

// Split "host:port"; throws ConfigError on a malformed address.
std::pair<std::string, int> parse_address(const std::string& address);

// Serves one env-api environment to one TCP client at a time, in strict
// request-response order. Protocol violations are answered with an error
// message and the connection is closed; the environment is reset between
// clients.
class BridgeServer {
 public:
  // Binds immediately; port 0 picks an ephemeral port.
  BridgeServer(Environment& env, const std::string& host, int port);
  ~BridgeServer();

  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  int port() const { return port_; }

  // Accept clients until stop() is called.
  void run();

  // Handle exactly one client session.
  void serve_one();

  // Unblocks run()/serve_one() from another thread.
  void stop();

 private:
  void session(int client_fd);

  Environment* env_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<int> client_fd_{-1};
  std::atomic<bool> stop_{false};
};

// Presents a remote served environment through the env-api contract.
// The spec message is fetched at construction and the protocol version
// checked; reset/step are forwarded transparently.
class RemoteEnvironment final : public Environment {
 public:
  RemoteEnvironment(const std::string& host, int port,
                    double timeout_seconds = 30.0);
  ~RemoteEnvironment() override;

  RemoteEnvironment(const RemoteEnvironment&) = delete;
  RemoteEnvironment& operator=(const RemoteEnvironment&) = delete;

  const ActionSpec& action_spec() const override { return action_spec_; }
  const ObservationSpec& observation_spec() const override { return obs_spec_; }

  Observation reset(std::optional<std::uint64_t> seed = std::nullopt) override;
  StepResult step(std::span<const double> action) override;

 private:
  nlohmann::json request(const nlohmann::json& message);
  std::string read_line();

  int fd_ = -1;
  std::string buffer_;
  ActionSpec action_spec_;
  ObservationSpec obs_spec_;
};

}  // namespace rlstar

#endif  // RLSTAR_BRIDGE_HPP_
