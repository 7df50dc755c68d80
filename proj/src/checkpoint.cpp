// SPDX-License-Identifier: Apache-2.0

#include "rlstar/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void f64_array(std::span<const double> values) {
    for (double v : values) {
      f64(v);
    }
  }

  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++]))
           << (8 * i);
    }
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++]))
           << (8 * i);
    }
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void f64_array(std::span<double> out) {
    for (double& v : out) {
      v = f64();
    }
  }

  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointFormatError("checkpoint truncated");
    }
  }

  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<int> read_layer_sizes(Reader& reader) {
  const std::uint32_t count = reader.u32();
  if (count < 2 || count > 64) {
    throw CheckpointFormatError("checkpoint header: implausible layer count");
  }
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    const std::uint32_t v = reader.u32();
    if (v == 0 || v > 1'000'000) {
      throw CheckpointFormatError("checkpoint header: implausible layer size");
    }
    s = static_cast<int>(v);
  }
  return sizes;
}

}  // namespace

void save_checkpoint(const Policy& policy, const PolicyAdam* adam,
                     const std::filesystem::path& path) {
  Writer w;
  for (char c : kCheckpointMagic) {
    w.u8(static_cast<std::uint8_t>(c));
  }
  w.u32(static_cast<std::uint32_t>(policy.act_dim()));
  w.u32(static_cast<std::uint32_t>(policy.actor.layer_sizes().size()));
  for (int s : policy.actor.layer_sizes()) {
    w.u32(static_cast<std::uint32_t>(s));
  }
  w.u32(static_cast<std::uint32_t>(policy.critic.layer_sizes().size()));
  for (int s : policy.critic.layer_sizes()) {
    w.u32(static_cast<std::uint32_t>(s));
  }
  w.u8(adam != nullptr ? 1 : 0);
  w.f64_array(policy.actor.params());
  w.f64_array(policy.log_std);
  w.f64_array(policy.critic.params());
  if (adam != nullptr) {
    w.u64(static_cast<std::uint64_t>(adam->actor.step_count));
    w.f64_array(adam->actor.m);
    w.f64_array(adam->actor.v);
    w.f64_array(adam->log_std.m);
    w.f64_array(adam->log_std.v);
    w.f64_array(adam->critic.m);
    w.f64_array(adam->critic.v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open checkpoint for writing: " + path.string());
  }
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) {
    throw IoError("failed writing checkpoint: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint for reading: " + path.string());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  Reader reader(std::move(bytes));

  char magic[8];
  reader.raw(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    if (std::memcmp(magic, "RLSTAR", 6) == 0) {
      throw CheckpointFormatError(
          std::string("unsupported checkpoint version \"") +
          std::string(magic, 8) + "\"; expected \"" +
          std::string(kCheckpointMagic, 8) + "\"");
    }
    throw CheckpointFormatError("not a checkpoint file (bad magic)");
  }

  const std::uint32_t act_dim = reader.u32();
  const std::vector<int> actor_sizes = read_layer_sizes(reader);
  const std::vector<int> critic_sizes = read_layer_sizes(reader);
  if (actor_sizes.back() != static_cast<int>(act_dim)) {
    throw CheckpointFormatError(
        "checkpoint header: actor output size disagrees with action dim");
  }
  if (critic_sizes.back() != 1) {
    throw CheckpointFormatError(
        "checkpoint header: critic output size must be 1");
  }
  const bool has_adam = reader.u8() != 0;

  Checkpoint ckpt;
  ckpt.policy.actor = Mlp(actor_sizes);
  ckpt.policy.log_std.assign(act_dim, 0.0);
  ckpt.policy.critic = Mlp(critic_sizes);
  reader.f64_array(ckpt.policy.actor.params());
  reader.f64_array(ckpt.policy.log_std);
  reader.f64_array(ckpt.policy.critic.params());

  if (has_adam) {
    PolicyAdam adam(ckpt.policy);
    const std::uint64_t steps = reader.u64();
    adam.actor.step_count = static_cast<long long>(steps);
    adam.log_std.step_count = static_cast<long long>(steps);
    adam.critic.step_count = static_cast<long long>(steps);
    reader.f64_array(adam.actor.m);
    reader.f64_array(adam.actor.v);
    reader.f64_array(adam.log_std.m);
    reader.f64_array(adam.log_std.v);
    reader.f64_array(adam.critic.m);
    reader.f64_array(adam.critic.v);
    ckpt.adam = std::move(adam);
  }

  if (!reader.exhausted()) {
    throw CheckpointFormatError("checkpoint has trailing bytes");
  }
  return ckpt;
}

}  // namespace rlstar
