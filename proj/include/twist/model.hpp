// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twist/autograd.hpp"
#include "twist/config.hpp"
#include "twist/parameter_store.hpp"
#include "twist/rng.hpp"
#include "twist/subnet.hpp"

namespace twist {

/// `batch` sequences of `seq` tokens each, flattened row-major, with the
/// next-token targets aligned position by position.
struct TokenBatch {
  int batch = 0;
  int seq = 0;
  std::vector<std::int32_t> inputs;
  std::vector<std::int32_t> targets;
};

namespace names {
inline constexpr const char* tok_emb = "tok_emb";
inline constexpr const char* pos_emb = "pos_emb";
inline constexpr const char* proj = "proj";
inline constexpr const char* ln_f_gamma = "ln_f.gamma";
inline constexpr const char* ln_f_beta = "ln_f.beta";
std::string layer(int l, const char* leaf);
}  // namespace names

/// Draws a fresh central model:
///   Wq, Wk, Wv ~ N(0, 1/d_model)      C_attn ~ N(0, 1/(H d_head))
///   W_ffn      ~ N(0, 2/d_model)      C_ffn  ~ N(0, 1/d_inner)
///   embeddings ~ N(0, 1/d_model), layer norm gamma = 1, everything else 0.
ParameterStore init_params(const ModelConfig& config, Rng& rng);

/// Logits [batch*seq x vocab]. With a masked spec, dropped heads and FFN
/// chunks contribute nothing; with a physical spec the store must already be
/// sliced to the kept widths. Either way each subnet sublayer output is
/// multiplied by sqrt(N_full / N_sub) ahead of its residual add when the
/// spec asks for scale correction. No spec means the full model, unscaled.
Tensor forward(const ModelConfig& config, const ParameterStore& params, const TokenBatch& batch,
               const SubnetSpec* spec = nullptr);

/// Mean next-token cross-entropy of the batch.
double loss(const ModelConfig& config, const ParameterStore& params, const TokenBatch& batch,
            const SubnetSpec* spec = nullptr);

/// Mean cross-entropy and its gradient, accumulated into each tensor's grad
/// buffer (buffers are zeroed first). Only the gradient buffers of `params`
/// are written.
double loss_and_grad(const ModelConfig& config, ParameterStore& params, const TokenBatch& batch,
                     const SubnetSpec* spec = nullptr);

/// Physically slices the kept heads / FFN chunks out of a full store.
ParameterStore extract_physical_subnet(const ModelConfig& config, const ParameterStore& params,
                                       const SubnetSpec& spec);

/// Parameter count of the store extract_physical_subnet would produce,
/// by shape enumeration (no data touched).
std::int64_t subnet_param_count(const ModelConfig& config, const SubnetSpec& spec);

/// Slices owned by one attention head / one FFN chunk of a layer.
std::vector<Slice> attn_block_slices(const ModelConfig& config, int layer, int head);
std::vector<Slice> ffn_block_slices(const ModelConfig& config, int layer, int block);
/// Whole-tensor names that no block owns (embeddings, norms, output biases, ...).
std::vector<std::string> shared_param_names(const ModelConfig& config);
/// Names of tensors whose slices belong to attention / FFN blocks of a layer.
std::vector<std::string> attn_block_param_names(int layer);
std::vector<std::string> ffn_block_param_names(int layer);

/// Maps each slice a subnet holds, in central-model coordinates, to the
/// matching slice of the subnet's own store (identical for masked specs).
struct SliceMapping {
  Slice central;
  Slice local;
};
std::vector<SliceMapping> subnet_slice_mapping(const ModelConfig& config, const SubnetSpec& spec);

}  // namespace twist
