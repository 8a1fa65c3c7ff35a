// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/subnet.hpp"

namespace twist {

/// Parameter, memory and communication figures for a GPT-2 style model.
///
///   N_embd  = vocab * d_model
///   N_attn  = 4 d_attn d_model + 3 d_attn + d_model,  d_attn = alpha H d_head
///   N_ffn   = 2 d_ffn d_model + d_ffn + d_model,      d_ffn  = beta d_inner
///   N_ln    = 2 d_model
///   N_layer = 2 N_ln + N_attn + N_ffn   (pre-LN layer: attention and FFN norms)
///   N_model = N_embd + sum_l N_layer + N_final_ln + N_proj
///
/// Learned positional embeddings (context * d_model) are reported separately
/// in n_pos and excluded from n_model.
struct CostReport {
  std::int64_t n_embd = 0;
  std::int64_t n_pos = 0;
  std::int64_t n_ln = 0;
  std::vector<std::int64_t> n_attn;
  std::vector<std::int64_t> n_ffn;
  std::vector<std::int64_t> n_layer;
  std::int64_t n_final_ln = 0;
  std::int64_t n_proj = 0;
  std::int64_t n_model = 0;
  std::int64_t bytes_per_param = 4;

  std::int64_t n_total() const { return n_model + n_pos; }
  /// Weights only, positional table included.
  std::int64_t memory_bytes() const { return n_total() * bytes_per_param; }
  /// Weights + gradients + two Adam moments.
  std::int64_t training_memory_bytes() const { return 4 * memory_bytes(); }
  /// (name, count) rows for CSV output.
  std::vector<std::pair<std::string, std::int64_t>> rows() const;
};

/// alpha[l] / beta[l]: fraction of attention heads / FFN chunks kept in layer
/// l (empty vectors mean 1 everywhere). Throws Errc::invalid_sparsity if a
/// fraction is outside (0, 1] or alpha*H (beta*R) is not an integer.
CostReport count_params(const ModelConfig& config, const std::vector<double>& alpha = {},
                        const std::vector<double>& beta = {});

/// Same formulas with explicit per-layer widths d_attn / d_ffn.
CostReport count_params_widths(const ModelConfig& config, const std::vector<std::int64_t>& d_attn,
                               const std::vector<std::int64_t>& d_ffn);

/// Cost report of the subnet a spec describes.
CostReport count_params(const ModelConfig& config, const SubnetSpec& spec);

struct ModelPreset {
  std::string name;
  ModelConfig config;
};

/// GPT-2 small / medium / large / xl dimensions (vocab 50257, context 1024),
/// all layers partitionable, tied output projection.
std::vector<ModelPreset> gpt2_family();
ModelPreset find_preset(const std::string& name);

struct MemoryRatioPoint {
  std::string name;
  std::int64_t full_params = 0;
  std::int64_t subnet_params = 0;
  double ratio = 0.0;                 // positional table excluded
  double ratio_with_positional = 0.0;
};

/// Subnet/full parameter ratio when every layer keeps `fraction` of its
/// attention and FFN width. Widths are scaled directly, so a 25-head model
/// at one half keeps 12.5 heads' worth of columns.
std::vector<MemoryRatioPoint> memory_ratio_curve(const std::vector<ModelPreset>& family,
                                                 double fraction = 0.5);

/// shared + fraction * partitioned over shared + partitioned.
double memory_ratio(std::int64_t shared, std::int64_t partitioned, double fraction);

/// 2 x sum over rounds and workers of bytes_per_param * params(worker subnet),
/// positional table included (it travels with the model).
std::int64_t comm_volume(const ModelConfig& config, const std::vector<std::vector<SubnetSpec>>& schedule,
                         std::int64_t bytes_per_param = 4);

}  // namespace twist
