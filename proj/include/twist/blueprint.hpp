// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/rng.hpp"
#include "twist/subnet.hpp"

namespace twist {

/// Block assignment of one layer for one repartition round: row s lists the
/// N_sub block indices worker s trains, sorted ascending.
struct Blueprint {
  std::vector<std::vector<int>> assignments;
  int layer_id = 0;
  int n_full = 0;
  std::vector<int> common;

  int workers() const { return static_cast<int>(assignments.size()); }
  int n_sub() const { return assignments.empty() ? 0 : static_cast<int>(assignments.front().size()); }
};

/// Smallest N_sub satisfying (N_full + (S-1)|C|) / S <= N_sub.
int min_feasible_subnet_blocks(int n_full, int workers, int n_common);

/// Three-phase generator: common blocks in every row, then the remaining
/// blocks dealt round-robin in a random order so each is assigned at least
/// once, then each row topped up to N_sub by uniform sampling without
/// replacement from the blocks it lacks. Throws Errc::infeasible when N_sub
/// violates the size bound.
Blueprint generate_blueprint(int n_full, int workers, int n_sub, std::span<const int> common, Rng& rng,
                             int layer_id = 0);

struct BlueprintReport {
  bool contains_common = true;  // (i)
  bool covers_all = true;       // (ii)
  bool size_ok = true;          // (iii)
  bool bound_ok = true;
  std::vector<int> rows_missing_common;
  std::vector<int> unassigned_blocks;
  std::vector<int> bad_rows;  // wrong length, duplicates or out-of-range entries

  bool ok() const { return contains_common && covers_all && size_ok && bound_ok; }
  std::string str() const;
};

BlueprintReport validate_blueprint(const Blueprint& bp);

/// Deployment-time subnet: every partitioned, in-scope layer independently
/// keeps round-half-up(kappa * N_full) uniformly sampled blocks. No coverage
/// constraint applies.
SubnetSpec deployment_spec(const ModelConfig& config, Ratio ratio, Scope scope, Rng& rng,
                           SubnetMode mode = SubnetMode::masked);

/// Blueprints for one repartition round. Entries are empty for shared layers
/// and for the sublayer kind the scope leaves alone.
struct LayerBlueprints {
  std::optional<Blueprint> attn;
  std::optional<Blueprint> ffn;
};
using BlueprintSet = std::vector<LayerBlueprints>;

BlueprintSet generate_round_blueprints(const ModelConfig& config, int workers, Ratio ratio, Scope scope,
                                       Rng& rng);

/// Human-readable block for run logs.
std::string blueprint_text(const Blueprint& bp, const char* kind);

}  // namespace twist
