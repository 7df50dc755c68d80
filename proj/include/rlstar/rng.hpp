// SPDX-License-Identifier: Apache-2.0

#ifndef RLSTAR_RNG_HPP_
#define RLSTAR_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace rlstar {

// Seeded random stream. The mt19937_64 engine output is fully specified by
// the standard; the distributions below are implemented by hand so the whole
// stream is reproducible across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two engine outputs.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n), n >= 1. Multiply-shift bounding.
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Derive a seed for a child stream.
  std::uint64_t split() { return next_u64(); }

 private:
  std::mt19937_64 gen_;
};

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace rlstar

#endif  // RLSTAR_RNG_HPP_
