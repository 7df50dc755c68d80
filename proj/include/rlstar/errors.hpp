// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_ERRORS_HPP_
#define RLSTAR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rlstar {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A vector or matrix argument has the wrong size.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Action vector length does not match the environment's ActionSpec.
class ActionDimensionMismatch : public DimensionMismatch {
 public:
  using DimensionMismatch::DimensionMismatch;
};

// Parameter/gradient/optimizer-state shapes disagree.
class ShapeMismatch : public DimensionMismatch {
 public:
  using DimensionMismatch::DimensionMismatch;
};

// Arrays that must share a length do not.
class LengthMismatch : public DimensionMismatch {
 public:
  using DimensionMismatch::DimensionMismatch;
};

// A backward pass was given a cache from a different forward pass.
class CacheMismatch : public Error {
 public:
  using Error::Error;
};

// step() called on an environment whose episode already ended.
class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

// The training loss became NaN or infinite.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// Bad configuration value, unresolved task/algorithm name, malformed config file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (unwritable directory, unreadable file).
class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint file is corrupt, truncated, or has the wrong magic/version.
class CheckpointFormatError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure talking to a remote environment.
class ConnectError : public Error {
 public:
  using Error::Error;
};

// Remote peer speaks a different protocol version.
class ProtocolVersionMismatch : public ConnectError {
 public:
  using ConnectError::ConnectError;
};

// Remote peer answered with a protocol error message.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace rlstar

#endif  // RLSTAR_ERRORS_HPP_
