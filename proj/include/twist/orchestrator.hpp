// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/data.hpp"
#include "twist/parameter_store.hpp"
#include "twist/partition.hpp"
#include "twist/subnet.hpp"

namespace twist {

enum class Backend { twist, data_parallel };

const char* backend_name(Backend b);
Backend parse_backend(const std::string& s);

struct TrainConfig {
  Backend backend = Backend::twist;
  int workers = 4;
  int epochs = 1;
  int batch_size = 8;
  int seq_len = 128;
  float lr = 1e-3f;
  int repartition_interval = 15;  // batches per communication round
  Scope scope = Scope::both;
  Ratio train_ratio{1, 2};
  Variant variant = Variant::physical;
  std::uint64_t seed = 0;
  std::string dataset;
  Tokenizer tokenizer = Tokenizer::chars;
  int eval_every_rounds = 0;  // 0: evaluate only before and after training
  int eval_batches = 0;       // 0: whole validation split
  int threads = 1;            // worker-level parallelism, never changes results

  void validate() const;
};

struct RoundLog {
  int round = 0;
  int worker = 0;
  std::int64_t bytes_out = 0;
  std::int64_t bytes_in = 0;
  int blocks_attn = 0;
  int blocks_ffn = 0;
};

struct EvalPoint {
  int round = 0;
  double loss = 0.0;
};

struct RunRecord {
  std::vector<double> round_losses;
  std::vector<std::int64_t> cumulative_bytes;
  std::int64_t peak_worker_param_bytes = 0;
  double wall_seconds = 0.0;
  std::string checkpoint_path;
  std::vector<RoundLog> round_logs;
  std::vector<EvalPoint> evals;
  /// Per-round worker specs, as accounted for communication.
  std::vector<std::vector<SubnetSpec>> schedule;

  std::int64_t total_bytes() const { return cumulative_bytes.empty() ? 0 : cumulative_bytes.back(); }
};

struct TrainResult {
  RunRecord record;
  ParameterStore params;
};

/// Repartition -> scatter -> local Adam steps -> gather -> aggregate, once
/// every repartition_interval batches. Worker optimizer state starts fresh
/// each round. Throws Errc::infeasible for an unsatisfiable ratio and
/// Errc::numeric (with round diagnostics) on a non-finite loss.
TrainResult train_twist(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus,
                        std::optional<ParameterStore> initial = std::nullopt);

/// Synchronous data parallelism: every worker computes a gradient on its own
/// shard with identical parameters, gradients are averaged, one Adam step.
TrainResult train_data_parallel(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus,
                                std::optional<ParameterStore> initial = std::nullopt);

TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus);

struct EvalResult {
  double loss = 0.0;
  double perplexity = 0.0;
  std::int64_t tokens = 0;
};

/// exp(mean token cross-entropy) over the split windows of window_starts.
/// A spec evaluates that subnet (mask + scaling); no spec means the plain
/// full model. max_batches = 0 evaluates everything.
EvalResult evaluate(const ModelConfig& config, const ParameterStore& params,
                    const std::vector<std::int32_t>& split, int seq_len, int batch_size,
                    const SubnetSpec* spec = nullptr, int max_batches = 0);

/// Each worker's subnet evaluated independently; losses averaged.
EvalResult evaluate_workers(const ModelConfig& config, const ParameterStore& params,
                            const std::vector<SubnetSpec>& specs, const std::vector<std::int32_t>& split,
                            int seq_len, int batch_size, int max_batches = 0);

}  // namespace twist
