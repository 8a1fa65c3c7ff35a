// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/parameter_store.hpp"
#include "twist/subnet.hpp"

namespace twist {

struct SweepCell {
  std::string model;  // checkpoint label
  Ratio train_ratio;
  Ratio eval_ratio;
  Scope scope = Scope::both;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for n < 2
  double min = 0.0;
  double max = 0.0;
  int n = 0;
  std::vector<double> values;
};

struct SweepResult {
  std::string metric;  // "loss" or "ppl"
  std::vector<SweepCell> cells;

  const SweepCell& cell(const std::string& model, Ratio eval) const;
  const SweepCell& cell(Ratio train, Ratio eval) const;
};

struct SweepData {
  const std::vector<std::int32_t>* tokens = nullptr;
  int seq_len = 128;
  int batch_size = 8;
  int max_batches = 0;
};

struct LabeledModel {
  std::string label;
  Ratio train_ratio;
  const ParameterStore* params = nullptr;
};

/// For each ratio, n_subnets deployment subnets (the same draws for every
/// model) are evaluated; cells hold the eval-loss distribution per model.
SweepResult stability_sweep(const ModelConfig& config, const std::vector<LabeledModel>& models,
                            const std::vector<Ratio>& ratios, int n_subnets, Scope scope,
                            const SweepData& data, std::uint64_t seed);

/// Mean perplexity of n_subnets random subnets for every (train, eval) pair.
SweepResult robustness_grid(const ModelConfig& config, const std::vector<LabeledModel>& models,
                            const std::vector<Ratio>& eval_ratios, int n_subnets, Scope scope,
                            const SweepData& data, std::uint64_t seed);

/// Mean over cells with train > eval (downward) and train < eval (upward) of
/// metric(train, eval) - metric(train, train).
struct MismatchSummary {
  double downward = 0.0;
  double upward = 0.0;
  int n_downward = 0;
  int n_upward = 0;
};
MismatchSummary mismatch_degradation(const SweepResult& grid);

/// Per-block empirical Fisher score: the sum over batches of squared
/// gradients of every parameter the block owns.
struct BlockScores {
  std::vector<std::vector<double>> attn;  // [layer][head]
  std::vector<std::vector<double>> ffn;   // [layer][block]
};
BlockScores fisher_block_scores(const ModelConfig& config, const ParameterStore& params, const SweepData& data);

/// Keeps the highest-scoring round-half-up(ratio * N_full) blocks of each
/// partitioned, in-scope layer (ties go to the lower index).
SubnetSpec fisher_block_prune(const ModelConfig& config, const ParameterStore& params, const SweepData& data,
                              Ratio ratio, Scope scope);
SubnetSpec prune_by_scores(const ModelConfig& config, const BlockScores& scores, Ratio ratio, Scope scope);

}  // namespace twist
