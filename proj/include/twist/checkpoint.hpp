// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/parameter_store.hpp"
#include "twist/subnet.hpp"

namespace twist {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Checkpoint container, all integers little-endian:
///
///   "TWST" | u32 version | ModelConfig | u8 has_subnet [SubnetSpec]
///   | u32 n_records | n_records x (u32 name_len, name, u8 dtype=0 (f32),
///   u32 rank, rank x u64 dim, raw f32 data)
///
/// An extracted (physically sliced) model carries its SubnetSpec so that the
/// scale factors and the full-model reference widths survive the round trip.
struct Checkpoint {
  ModelConfig config;
  std::optional<SubnetSpec> subnet;
  ParameterStore params;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Bytes spent on raw tensor data (sum of numel * 4).
std::int64_t checkpoint_payload_bytes(const Checkpoint& ckpt);

}  // namespace twist
