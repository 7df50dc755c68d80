// SPDX-License-Identifier: Apache-2.0

#include "rlstar/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

void append_value(std::string& out, const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out.push_back(',');
        first = false;
        append_escaped(out, key);
        out.push_back(':');
        append_value(out, item);
      }
      out.push_back('}');
      break;
    }
    case nlohmann::json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : v) {
        if (!first) out.push_back(',');
        first = false;
        append_value(out, item);
      }
      out.push_back(']');
      break;
    }
    case nlohmann::json::value_t::string:
      append_escaped(out, v.get<std::string>());
      break;
    case nlohmann::json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        throw Error("bridge: refusing to serialize a non-finite number");
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
      break;
    }
    case nlohmann::json::value_t::null:
    default:
      out += "null";
      break;
  }
}

void close_fd(std::atomic<int>& fd) {
  const int f = fd.exchange(-1);
  if (f >= 0) {
    ::shutdown(f, SHUT_RDWR);
    ::close(f);
  }
}

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent,
                             MSG_NOSIGNAL);
    if (n <= 0) {
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

// Reads one newline-terminated line. Returns false on EOF/transport error.
bool recv_line(int fd, std::string& buffer, std::string& line) {
  while (true) {
    const auto pos = buffer.find('\n');
    if (pos != std::string::npos) {
      line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) {
      return false;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

nlohmann::json error_message(const std::string& code, const std::string& text) {
  return nlohmann::json{{"type", "error"}, {"code", code}, {"message", text}};
}

nlohmann::json obs_to_json(const Observation& obs) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : obs) {
    arr.push_back(v);
  }
  return arr;
}

}  // namespace

std::string serialize_line(const nlohmann::json& message) {
  std::string out;
  append_value(out, message);
  out.push_back('\n');
  return out;
}

nlohmann::json parse_line(const std::string& line) {
  nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error("bridge: malformed message");
  }
  return parsed;
}

std::pair<std::string, int> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 ||
      colon + 1 == address.size()) {
    throw ConfigError("bad address \"" + address + "\"; expected host:port");
  }
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in address \"" + address + "\"");
  }
  if (port < 0 || port > 65535) {
    throw ConfigError("port out of range in address \"" + address + "\"");
  }
  return {address.substr(0, colon), port};
}

BridgeServer::BridgeServer(Environment& env, const std::string& host, int port)
    : env_(&env) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw ConnectError("bridge server: socket() failed");
  }
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(),
                  &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ConfigError("bridge server: bad listen host \"" + host + "\"");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listen_fd_);
    throw ConnectError("bridge server: cannot bind " + host + ":" +
                       std::to_string(port));
  }
  if (::listen(listen_fd_, 1) != 0) {
    ::close(listen_fd_);
    throw ConnectError("bridge server: listen() failed");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

BridgeServer::~BridgeServer() {
  stop();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void BridgeServer::stop() {
  stop_.store(true);
  close_fd(client_fd_);
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
  }
}

void BridgeServer::run() {
  while (!stop_.load()) {
    serve_one();
  }
}

void BridgeServer::serve_one() {
  const int client = ::accept(listen_fd_, nullptr, nullptr);
  if (client < 0) {
    return;
  }
  client_fd_.store(client);
  const int one = 1;
  ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  session(client);
  close_fd(client_fd_);
  // A fresh episode for the next client.
  try {
    env_->reset();
  } catch (const Error& e) {
    std::cerr << "bridge server: reset between clients failed: " << e.what()
              << "\n";
  }
}

void BridgeServer::session(int client_fd) {
  std::string buffer;
  std::string line;
  bool has_reset = false;

  while (recv_line(client_fd, buffer, line)) {
    nlohmann::json msg;
    try {
      msg = parse_line(line);
    } catch (const Error&) {
      send_all(client_fd,
               serialize_line(error_message("parse", "malformed message")));
      return;
    }

    const std::string type = msg.value("type", "");
    nlohmann::json reply;
    try {
      if (type == "spec") {
        const ActionSpec& act = env_->action_spec();
        const ObservationSpec& obs = env_->observation_spec();
        reply = nlohmann::json{{"type", "spec"},
                               {"protocol_version", kProtocolVersion},
                               {"obs_dim", obs.dim},
                               {"act_dim", act.dim},
                               {"act_low", act.low},
                               {"act_high", act.high}};
      } else if (type == "reset") {
        std::optional<std::uint64_t> seed;
        if (msg.contains("seed")) {
          seed = msg.at("seed").get<std::uint64_t>();
        }
        const Observation obs = env_->reset(seed);
        has_reset = true;
        reply = nlohmann::json{{"type", "obs"},
                               {"observation", obs_to_json(obs)}};
      } else if (type == "step") {
        if (!has_reset) {
          send_all(client_fd, serialize_line(error_message(
                                  "not_reset", "step before reset")));
          return;
        }
        if (!msg.contains("action") || !msg.at("action").is_array()) {
          send_all(client_fd, serialize_line(error_message(
                                  "bad_action", "step needs an action array")));
          return;
        }
        std::vector<double> action;
        for (const auto& v : msg.at("action")) {
          action.push_back(v.get<double>());
        }
        StepResult result = env_->step(action);
        nlohmann::json info = nlohmann::json::object();
        for (const auto& [key, value] : result.info) {
          info[key] = value;
        }
        reply = nlohmann::json{{"type", "transition"},
                               {"observation", obs_to_json(result.observation)},
                               {"reward", result.reward},
                               {"done", result.done},
                               {"info", info}};
      } else {
        send_all(client_fd, serialize_line(error_message(
                                "bad_message", "unknown type \"" + type + "\"")));
        return;
      }
    } catch (const ActionDimensionMismatch& e) {
      send_all(client_fd, serialize_line(error_message("bad_action", e.what())));
      return;
    } catch (const EpisodeFinished& e) {
      send_all(client_fd,
               serialize_line(error_message("episode_finished", e.what())));
      return;
    } catch (const nlohmann::json::exception& e) {
      send_all(client_fd, serialize_line(error_message("parse", e.what())));
      return;
    } catch (const Error& e) {
      send_all(client_fd, serialize_line(error_message("internal", e.what())));
      return;
    }

    if (!send_all(client_fd, serialize_line(reply))) {
      return;
    }
  }
}

RemoteEnvironment::RemoteEnvironment(const std::string& host, int port,
                                     double timeout_seconds) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &result) != 0 ||
      result == nullptr) {
    throw ConnectError("cannot resolve " + host + ":" + port_str);
  }
  fd_ = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(result);
    throw ConnectError("socket() failed");
  }
  if (::connect(fd_, result->ai_addr, result->ai_addrlen) != 0) {
    ::freeaddrinfo(result);
    ::close(fd_);
    fd_ = -1;
    throw ConnectError("cannot connect to " + host + ":" + port_str);
  }
  ::freeaddrinfo(result);

  timeval tv{};
  tv.tv_sec = static_cast<long>(timeout_seconds);
  tv.tv_usec = static_cast<long>((timeout_seconds - tv.tv_sec) * 1e6);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  const nlohmann::json spec = request({{"type", "spec"}});
  const int version = spec.value("protocol_version", -1);
  if (version != kProtocolVersion) {
    ::close(fd_);
    fd_ = -1;
    throw ProtocolVersionMismatch(
        "server speaks protocol version " + std::to_string(version) +
        ", client expects " + std::to_string(kProtocolVersion));
  }
  action_spec_.dim = spec.at("act_dim").get<int>();
  action_spec_.low = spec.at("act_low").get<std::vector<double>>();
  action_spec_.high = spec.at("act_high").get<std::vector<double>>();
  obs_spec_.dim = spec.at("obs_dim").get<int>();
  obs_spec_.low.assign(obs_spec_.dim, -1.0);
  obs_spec_.high.assign(obs_spec_.dim, 1.0);
}

RemoteEnvironment::~RemoteEnvironment() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

std::string RemoteEnvironment::read_line() {
  std::string line;
  if (!recv_line(fd_, buffer_, line)) {
    throw ConnectError("remote environment: connection lost or read timeout");
  }
  return line;
}

nlohmann::json RemoteEnvironment::request(const nlohmann::json& message) {
  if (fd_ < 0) {
    throw ConnectError("remote environment: not connected");
  }
  if (!send_all(fd_, serialize_line(message))) {
    throw ConnectError("remote environment: send failed");
  }
  nlohmann::json reply;
  try {
    reply = parse_line(read_line());
  } catch (const ConnectError&) {
    throw;
  } catch (const Error& e) {
    throw RemoteError("parse", e.what());
  }
  if (reply.value("type", "") == "error") {
    throw RemoteError(reply.value("code", "unknown"),
                      reply.value("message", ""));
  }
  return reply;
}

Observation RemoteEnvironment::reset(std::optional<std::uint64_t> seed) {
  nlohmann::json msg{{"type", "reset"}};
  if (seed.has_value()) {
    msg["seed"] = *seed;
  }
  const nlohmann::json reply = request(msg);
  if (reply.value("type", "") != "obs") {
    throw RemoteError("protocol", "expected obs reply to reset");
  }
  return reply.at("observation").get<Observation>();
}

StepResult RemoteEnvironment::step(std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(action_spec_.dim)) {
    throw ActionDimensionMismatch(
        "expected action of length " + std::to_string(action_spec_.dim) +
        ", got " + std::to_string(action.size()));
  }
  nlohmann::json act = nlohmann::json::array();
  for (double a : action) {
    act.push_back(a);
  }
  const nlohmann::json reply = request({{"type", "step"}, {"action", act}});
  if (reply.value("type", "") != "transition") {
    throw RemoteError("protocol", "expected transition reply to step");
  }
  StepResult result;
  result.observation = reply.at("observation").get<Observation>();
  result.reward = reply.at("reward").get<double>();
  result.done = reply.at("done").get<bool>();
  if (reply.contains("info")) {
    for (const auto& [key, value] : reply.at("info").items()) {
      result.info[key] = value.get<double>();
    }
  }
  return result;
}

}  // namespace rlstar
