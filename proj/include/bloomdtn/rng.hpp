#pragma once

#include <cmath>
#include <cstdint>

#include "bloomdtn/bloom.hpp"

namespace bloomdtn {

// SplitMix64. The std <random> distributions are implementation-defined, so
// every draw here is spelled out to keep runs identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

 private:
  std::uint64_t state_;
};

/// Seed for a per-node stream derived from the scenario seed.
constexpr std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t stream,
                                    std::uint64_t node) noexcept {
  return mix64(mix64(global_seed ^ (stream * 0xD6E8FEB86659FD93ULL)) + node);
}

}  // namespace bloomdtn
