// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace twist {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_id(std::string_view label, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // FNV-1a over the label, then mixed with the indices.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

namespace {
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = splitmix64(seed);
  std::uint64_t t = splitmix64(stream ^ 0x5851f42d4c957f2dULL);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

float Rng::normal(float mean, float stddev) {
  std::normal_distribution<float> dist(mean, stddev);
  return dist(engine_);
}

void Rng::fill_normal(std::span<float> out, float mean, float stddev) {
  std::normal_distribution<float> dist(mean, stddev);
  for (auto& v : out) v = dist(engine_);
}

double Rng::uniform() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::int64_t Rng::uniform_int(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  std::uniform_int_distribution<std::int64_t> dist(0, n - 1);
  return dist(engine_);
}

std::vector<int> Rng::sample(std::span<const int> pool, std::size_t k) {
  if (k > pool.size()) throw std::invalid_argument("sample: k exceeds pool size");
  std::vector<int> work(pool.begin(), pool.end());
  // Partial Fisher-Yates: the first k slots end up as a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    auto j = i + static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(work.size() - i)));
    std::swap(work[i], work[j]);
  }
  work.resize(k);
  return work;
}

void Rng::shuffle(std::vector<int>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i)));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace twist
