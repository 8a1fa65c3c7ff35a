// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "twist/config.hpp"

namespace twist {

enum class Scope { attn, ffn, both };
enum class SubnetMode { masked, physical };

const char* scope_name(Scope s);
Scope parse_scope(const std::string& s);
bool scope_has_attn(Scope s);
bool scope_has_ffn(Scope s);

/// Subnet ratio kappa = num/den of the blocks kept per partitioned layer.
struct Ratio {
  int num = 1;
  int den = 1;

  /// Accepts "X/Y" or a plain "X" (X blocks out of default_den).
  static Ratio parse(const std::string& s, int default_den = 0);
  double value() const { return static_cast<double>(num) / den; }
  /// round-half-up(kappa * n_full); throws Errc::invalid_ratio on 0 or > n_full.
  int kept(int n_full) const;
  std::string str() const;
  bool operator==(const Ratio&) const = default;
};

/// One worker's (or one deployment's) view of the model: which attention
/// heads and FFN blocks each layer keeps. Lists are always complete per layer
/// (shared or out-of-scope layers list every block) and sorted ascending.
struct SubnetSpec {
  std::vector<std::vector<int>> attn_blocks;
  std::vector<std::vector<int>> ffn_blocks;
  SubnetMode mode = SubnetMode::masked;
  Scope scope = Scope::both;
  bool scale_correction = true;

  static SubnetSpec full(const ModelConfig& config, SubnetMode mode = SubnetMode::masked);

  bool is_full(const ModelConfig& config) const;
  /// sqrt(N_full / N_sub) for the layer's attention (or FFN) sublayer; 1 when
  /// scale correction is off or the layer is complete.
  float attn_scale(const ModelConfig& config, int layer) const;
  float ffn_scale(const ModelConfig& config, int layer) const;

  /// Throws Errc::invalid_spec if lists are missing, unsorted, out of range,
  /// empty, or shared layers are not complete.
  void validate(const ModelConfig& config) const;

  bool operator==(const SubnetSpec&) const = default;
};

}  // namespace twist
