// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "rlstar/bridge.hpp"
#include "rlstar/errors.hpp"
#include "rlstar/ppmc.hpp"

using namespace rlstar;

namespace {

// Raw client for protocol-level tests.
class RawClient {
 public:
  RawClient(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd_ >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) ==
            0);
  }

  ~RawClient() {
    if (fd_ >= 0) {
      ::close(fd_);
    }
  }

  void send_line(const std::string& line) {
    std::string framed = line + "\n";
    REQUIRE(::send(fd_, framed.data(), framed.size(), 0) ==
            static_cast<ssize_t>(framed.size()));
  }

  std::string recv_line() {
    while (buffer_.find('\n') == std::string::npos) {
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      REQUIRE(n > 0);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    const auto pos = buffer_.find('\n');
    std::string line = buffer_.substr(0, pos);
    buffer_.erase(0, pos + 1);
    return line;
  }

  bool closed() {
    char c;
    return ::recv(fd_, &c, 1, 0) == 0;
  }

 private:
  int fd_ = -1;
  std::string buffer_;
};

struct ServedEnv {
  ServedEnv(std::uint64_t seed = 5)
      : env(TaskConfig{}, RoverParams{}, seed), server(env, "127.0.0.1", 0) {
    thread = std::thread([this] { server.run(); });
  }

  ~ServedEnv() {
    server.stop();
    thread.join();
  }

  PpmcEnv env;
  BridgeServer server;
  std::thread thread;
};

}  // namespace

TEST_CASE("doubles survive a serialize/parse round trip exactly") {
  const std::vector<double> values{0.1,
                                   1.0 / 3.0,
                                   std::numbers::pi,
                                   -1.2345678901234567e-11,
                                   1e300,
                                   -0.0,
                                   5.0,
                                   0.49999999999999994};
  nlohmann::json msg;
  msg["values"] = values;
  const std::string line = serialize_line(msg);
  CHECK(line.back() == '\n');
  CHECK(line.find('\n') == line.size() - 1);  // one line per message

  const nlohmann::json parsed = parse_line(line.substr(0, line.size() - 1));
  const std::vector<double> back = parsed.at("values").get<std::vector<double>>();
  REQUIRE(back.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(back[i] == values[i]);
  }
}

TEST_CASE("string escaping survives the round trip") {
  nlohmann::json msg;
  msg["message"] = "quote \" backslash \\ newline \n tab \t";
  const std::string line = serialize_line(msg);
  const nlohmann::json parsed = parse_line(line.substr(0, line.size() - 1));
  CHECK(parsed.at("message").get<std::string>() ==
        "quote \" backslash \\ newline \n tab \t");
}

TEST_CASE("address parsing") {
  const auto [host, port] = parse_address("127.0.0.1:4455");
  CHECK(host == "127.0.0.1");
  CHECK(port == 4455);
  CHECK_THROWS_AS(parse_address("nohost"), ConfigError);
  CHECK_THROWS_AS(parse_address(":99"), ConfigError);
  CHECK_THROWS_AS(parse_address("h:notaport"), ConfigError);
  CHECK_THROWS_AS(parse_address("h:99999"), ConfigError);
}

TEST_CASE("spec request reports the ppmc dimensions") {
  ServedEnv served;
  RawClient client(served.server.port());
  client.send_line(R"({"type":"spec"})");
  const nlohmann::json reply = parse_line(client.recv_line());
  CHECK(reply.at("type") == "spec");
  CHECK(reply.at("protocol_version") == 1);
  CHECK(reply.at("obs_dim") == 9);
  CHECK(reply.at("act_dim") == 2);
  CHECK(reply.at("act_low") == nlohmann::json::array({0.0, 0.0}));
  CHECK(reply.at("act_high") == nlohmann::json::array({1.0, 1.0}));
}

TEST_CASE("step before reset yields a not_reset error and closes") {
  ServedEnv served;
  RawClient client(served.server.port());
  client.send_line(R"({"type":"step","action":[0.5,0.5]})");
  const nlohmann::json reply = parse_line(client.recv_line());
  CHECK(reply.at("type") == "error");
  CHECK(reply.at("code") == "not_reset");
  CHECK(client.closed());
}

TEST_CASE("malformed lines yield a parse error and close") {
  ServedEnv served;
  RawClient client(served.server.port());
  client.send_line("garbage");
  const nlohmann::json reply = parse_line(client.recv_line());
  CHECK(reply.at("type") == "error");
  CHECK(reply.at("code") == "parse");
  CHECK(client.closed());
}

TEST_CASE("wrong action length yields a bad_action error") {
  ServedEnv served;
  RawClient client(served.server.port());
  client.send_line(R"({"type":"reset","seed":3})");
  parse_line(client.recv_line());
  client.send_line(R"({"type":"step","action":[0.5,0.5,0.5]})");
  const nlohmann::json reply = parse_line(client.recv_line());
  CHECK(reply.at("type") == "error");
  CHECK(reply.at("code") == "bad_action");
}

TEST_CASE("the server survives a client disconnect and serves the next one") {
  ServedEnv served;
  {
    RawClient first(served.server.port());
    first.send_line(R"({"type":"reset","seed":1})");
    parse_line(first.recv_line());
  }
  RawClient second(served.server.port());
  second.send_line(R"({"type":"spec"})");
  const nlohmann::json reply = parse_line(second.recv_line());
  CHECK(reply.at("type") == "spec");
}

TEST_CASE("remote environment matches the in-process one exactly") {
  ServedEnv served(99);
  RemoteEnvironment remote("127.0.0.1", served.server.port(), 5.0);
  PpmcEnv local(TaskConfig{}, RoverParams{}, 99);

  CHECK(remote.action_spec().dim == 2);
  CHECK(remote.observation_spec().dim == 9);

  const Observation ra = remote.reset(4242);
  const Observation la = local.reset(4242);
  REQUIRE(ra.size() == la.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i] == la[i]);
  }

  Rng rng(17);
  std::vector<double> action(2);
  for (int t = 0; t < 100; ++t) {
    action[0] = rng.uniform(-0.2, 1.2);
    action[1] = rng.uniform(-0.2, 1.2);
    const StepResult rs = remote.step(action);
    const StepResult ls = local.step(action);
    CHECK(std::abs(rs.reward - ls.reward) <= 1e-12);
    CHECK(rs.done == ls.done);
    for (std::size_t i = 0; i < ls.observation.size(); ++i) {
      CHECK(std::abs(rs.observation[i] - ls.observation[i]) <= 1e-12);
    }
    CHECK(rs.info.at("progress") == ls.info.at("progress"));
    if (rs.done) {
      remote.reset(7);
      local.reset(7);
    }
  }
}

TEST_CASE("client-side action length check") {
  ServedEnv served;
  RemoteEnvironment remote("127.0.0.1", served.server.port(), 5.0);
  remote.reset(1);
  CHECK_THROWS_AS(remote.step(std::vector<double>{0.1}),
                  ActionDimensionMismatch);
}

TEST_CASE("stepping after done surfaces the server error") {
  TaskConfig task;
  task.time_limit = 1;
  PpmcEnv env(task, RoverParams{}, 5);
  BridgeServer server(env, "127.0.0.1", 0);
  std::thread thread([&server] { server.run(); });

  {
    RemoteEnvironment remote("127.0.0.1", server.port(), 5.0);
    remote.reset(3);
    const StepResult r = remote.step(std::vector<double>{0.0, 0.0});
    CHECK(r.done);
    try {
      remote.step(std::vector<double>{0.0, 0.0});
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      CHECK(e.code() == "episode_finished");
    }
  }

  server.stop();
  thread.join();
}

TEST_CASE("a killed server surfaces ConnectError, not a hang") {
  auto served = std::make_unique<ServedEnv>();
  RemoteEnvironment remote("127.0.0.1", served->server.port(), 2.0);
  remote.reset(1);
  remote.step(std::vector<double>{0.5, 0.5});
  served.reset();  // stops the server mid-episode
  CHECK_THROWS_AS(remote.step(std::vector<double>{0.5, 0.5}), ConnectError);
}

TEST_CASE("a version-2 server is rejected naming both versions") {
  // Minimal fake server answering spec with protocol_version 2.
  const int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(listen_fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = 0;
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) ==
          0);
  REQUIRE(::listen(listen_fd, 1) == 0);
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&bound), &len);
  const int port = ntohs(bound.sin_port);

  std::thread fake([listen_fd] {
    const int client = ::accept(listen_fd, nullptr, nullptr);
    if (client < 0) {
      return;
    }
    char buf[4096];
    (void)::recv(client, buf, sizeof buf, 0);
    const std::string reply =
        R"({"type":"spec","protocol_version":2,"obs_dim":9,"act_dim":2,)"
        R"("act_low":[0,0],"act_high":[1,1]})"
        "\n";
    (void)::send(client, reply.data(), reply.size(), 0);
    ::close(client);
  });

  try {
    RemoteEnvironment remote("127.0.0.1", port, 2.0);
    FAIL("expected ProtocolVersionMismatch");
  } catch (const ProtocolVersionMismatch& e) {
    const std::string msg = e.what();
    CHECK(msg.find('2') != std::string::npos);
    CHECK(msg.find('1') != std::string::npos);
  }
  fake.join();
  ::close(listen_fd);
}

TEST_CASE("connecting to a dead port raises ConnectError") {
  CHECK_THROWS_AS(RemoteEnvironment("127.0.0.1", 1, 1.0), ConnectError);
}
