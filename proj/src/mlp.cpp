// SPDX-License-Identifier: Apache-2.0

#include "rlstar/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlstar/errors.hpp"

namespace rlstar {

namespace {

// Eight independent accumulators so the reduction vectorizes without
// reassociation flags; the lane sum order is fixed, keeping results
// bit-reproducible run to run.
double dot(const double* a, const double* b, int n) {
  double lanes[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  int k = 0;
  for (; k + 8 <= n; k += 8) {
    for (int j = 0; j < 8; ++j) {
      lanes[j] += a[k + j] * b[k + j];
    }
  }
  double tail = 0.0;
  for (; k < n; ++k) {
    tail += a[k] * b[k];
  }
  return ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) +
         ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) + tail;
}

void linear_forward(const double* x, const double* w, const double* b,
                    double* y, int batch, int in, int out) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * in;
    double* yr = y + static_cast<std::size_t>(bi) * out;
    for (int o = 0; o < out; ++o) {
      yr[o] = dot(xr, w + static_cast<std::size_t>(o) * in, in) + b[o];
    }
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw ConfigError("mlp: need at least an input and an output layer");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw ConfigError("mlp: layer sizes must be positive");
    }
    weight_offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
    bias_offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.assign(total, 0.0);
}

void Mlp::init_uniform(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = std::sqrt(1.0 / sizes_[l]);
    auto w = weight(l);
    for (double& v : w) {
      v = rng.uniform(-bound, bound);
    }
    auto b = bias(l);
    for (double& v : b) {
      v = 0.0;
    }
  }
}

std::span<double> Mlp::weight(int layer) {
  return {params_.data() + weight_offsets_[layer],
          static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer]};
}

std::span<double> Mlp::bias(int layer) {
  return {params_.data() + bias_offsets_[layer],
          static_cast<std::size_t>(sizes_[layer + 1])};
}

void Mlp::forward_batch(std::span<const double> inputs, int batch,
                        Cache& cache) const {
  if (batch < 1 ||
      inputs.size() != static_cast<std::size_t>(batch) * input_dim()) {
    throw DimensionMismatch("mlp forward: expected " +
                            std::to_string(input_dim()) + " values per input");
  }
  const int layers = num_layers();
  cache.layer_sizes = sizes_;
  cache.batch = batch;
  cache.acts.resize(layers);
  cache.acts[0].assign(inputs.begin(), inputs.end());
  cache.outputs.resize(static_cast<std::size_t>(batch) * output_dim());

  for (int l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const bool last = l == layers - 1;
    std::vector<double>& dst = last ? cache.outputs : cache.acts[l + 1];
    dst.resize(static_cast<std::size_t>(batch) * out);
    linear_forward(cache.acts[l].data(),
                   params_.data() + weight_offsets_[l],
                   params_.data() + bias_offsets_[l], dst.data(), batch, in,
                   out);
    if (!last) {
      for (double& v : dst) {
        v = std::tanh(v);
      }
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Cache cache;
  forward_batch(input, 1, cache);
  return cache.outputs;
}

void Mlp::backward_batch(const Cache& cache,
                         std::span<const double> output_grads,
                         std::span<double> param_grads,
                         std::span<double> input_grads) const {
  if (cache.layer_sizes != sizes_ || cache.batch < 1) {
    throw CacheMismatch("mlp backward: cache from a different network shape");
  }
  const int batch = cache.batch;
  if (output_grads.size() !=
      static_cast<std::size_t>(batch) * output_dim()) {
    throw DimensionMismatch("mlp backward: output gradient size mismatch");
  }
  if (param_grads.size() != params_.size()) {
    throw ShapeMismatch("mlp backward: parameter gradient size mismatch");
  }
  if (!input_grads.empty() &&
      input_grads.size() != static_cast<std::size_t>(batch) * input_dim()) {
    throw DimensionMismatch("mlp backward: input gradient size mismatch");
  }

  std::vector<double> grad(output_grads.begin(), output_grads.end());
  std::vector<double> grad_prev;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const std::vector<double>& act_in = cache.acts[l];
    double* dw = param_grads.data() + weight_offsets_[l];
    double* db = param_grads.data() + bias_offsets_[l];

    for (int bi = 0; bi < batch; ++bi) {
      const double* gr = grad.data() + static_cast<std::size_t>(bi) * out;
      const double* xr = act_in.data() + static_cast<std::size_t>(bi) * in;
      for (int o = 0; o < out; ++o) {
        const double go = gr[o];
        db[o] += go;
        double* dwr = dw + static_cast<std::size_t>(o) * in;
        for (int k = 0; k < in; ++k) {
          dwr[k] += go * xr[k];
        }
      }
    }

    const bool need_input_grad = l > 0 || !input_grads.empty();
    if (!need_input_grad) {
      break;
    }
    grad_prev.assign(static_cast<std::size_t>(batch) * in, 0.0);
    const double* w = params_.data() + weight_offsets_[l];
    for (int bi = 0; bi < batch; ++bi) {
      const double* gr = grad.data() + static_cast<std::size_t>(bi) * out;
      double* gp = grad_prev.data() + static_cast<std::size_t>(bi) * in;
      for (int o = 0; o < out; ++o) {
        const double go = gr[o];
        const double* wr = w + static_cast<std::size_t>(o) * in;
        for (int k = 0; k < in; ++k) {
          gp[k] += go * wr[k];
        }
      }
    }
    if (l > 0) {
      // act_in holds tanh outputs of layer l-1.
      for (std::size_t i = 0; i < grad_prev.size(); ++i) {
        grad_prev[i] *= 1.0 - act_in[i] * act_in[i];
      }
      grad.swap(grad_prev);
    } else {
      std::copy(grad_prev.begin(), grad_prev.end(), input_grads.begin());
    }
  }
}

}  // namespace rlstar
