// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_MLP_HPP_
#define RLSTAR_MLP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "rlstar/rng.hpp"

namespace rlstar {

// Fully connected network with tanh hidden activations and an identity
// output layer. Parameters live in one flat array, per layer: the weight
// matrix (rows = outputs, row-major) followed by the bias vector.
class Mlp {
 public:
  // Activation record of a forward pass, sufficient for an exact backward
  // pass. Reusable across calls; buffers keep their capacity.
  struct Cache {
    std::vector<int> layer_sizes;
    int batch = 0;
    std::vector<std::vector<double>> acts;  // acts[0]=inputs, acts[l]=input of layer l
    std::vector<double> outputs;            // batch x output_dim
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);  // zero-initialized parameters

  // Weights uniform in +-sqrt(1/fan_in), biases zero.
  void init_uniform(Rng& rng);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weight(int layer);
  std::span<double> bias(int layer);

  // Run `batch` stacked inputs through the network, filling cache.outputs.
  // Throws DimensionMismatch if inputs.size() != batch * input_dim().
  void forward_batch(std::span<const double> inputs, int batch, Cache& cache) const;

  // Single-input convenience wrapper.
  std::vector<double> forward(std::span<const double> input) const;

  // Reverse-mode gradients of the scalar whose per-output gradients are
  // given. Accumulates into param_grads (sized param_count()); optionally
  // fills input_grads (batch x input_dim). Throws CacheMismatch when the
  // cache does not belong to a matching forward pass.
  void backward_batch(const Cache& cache, std::span<const double> output_grads,
                      std::span<double> param_grads,
                      std::span<double> input_grads = {}) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
};

}  // namespace rlstar

#endif  // RLSTAR_MLP_HPP_
