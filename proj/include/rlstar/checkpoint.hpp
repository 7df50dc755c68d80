// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_CHECKPOINT_HPP_
#define RLSTAR_CHECKPOINT_HPP_

#include <filesystem>
#include <optional>

#include "rlstar/policy.hpp"

namespace rlstar {

// Binary checkpoint layout, all integers and doubles little-endian:
//   magic "RLSTAR01" (8 bytes)
//   u32 action_dim
//   u32 actor layer count, then that many u32 layer sizes
//   u32 critic layer count, then that many u32 layer sizes
//   u8 has_adam
//   f64 actor parameters (per layer: weights row-major, then biases)
//   f64 log_std (action_dim values)
//   f64 critic parameters (same per-layer order)
//   if has_adam: u64 step count, then f64 m and v for actor, log_std, critic
inline constexpr char kCheckpointMagic[8] = {'R', 'L', 'S', 'T',
                                             'A', 'R', '0', '1'};

struct Checkpoint {
  Policy policy;
  std::optional<PolicyAdam> adam;
};

// Throws IoError when the path is unwritable.
void save_checkpoint(const Policy& policy, const PolicyAdam* adam,
                     const std::filesystem::path& path);

// Throws IoError when unreadable and CheckpointFormatError on bad magic,
// unsupported version, truncation, trailing bytes, or an invalid header.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rlstar

#endif  // RLSTAR_CHECKPOINT_HPP_
