// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace twist {

/// Deterministic random stream. Identical (seed, stream) pairs always yield
/// identical draws; distinct streams are decorrelated through SplitMix64.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  float normal(float mean, float stddev);
  void fill_normal(std::span<float> out, float mean, float stddev);
  double uniform();
  /// Uniform integer in [0, n).
  std::int64_t uniform_int(std::int64_t n);
  /// k distinct elements drawn uniformly without replacement, in draw order.
  std::vector<int> sample(std::span<const int> pool, std::size_t k);
  void shuffle(std::vector<int>& values);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Stable 64-bit stream id for a label plus up to three indices.
std::uint64_t stream_id(std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0,
                        std::uint64_t c = 0);

}  // namespace twist
