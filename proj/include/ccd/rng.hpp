#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include <cstdint>
#include <vector>

namespace ccd {

/// SplitMix64. Used everywhere instead of <random> engines/distributions so
/// that generated suites are byte-identical across platforms and standard
/// library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Derive an independent stream for sub-task `index`.
  SplitMix64 split(std::uint64_t index) const {
    SplitMix64 mix(state_ ^ (0xA0761D6478BD642FULL * (index + 1)));
    mix.next();
    return mix;
  }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ccd
