// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace twist {

enum class Activation { relu, gelu };

/// Architecture of the GPT-style decoder plus which layers are never split.
struct ModelConfig {
  int n_layers = 8;
  int d_model = 128;
  int n_heads = 8;
  int d_head = 16;
  int d_inner = 512;
  int ffn_blocks = 8;  // R
  int vocab = 96;
  int context = 128;
  std::vector<int> shared_layers{0, 1, 6, 7};
  Activation activation = Activation::relu;
  bool tie_projection = true;
  bool scale_correction = true;

  int attn_width() const { return n_heads * d_head; }
  int ffn_block_width() const { return d_inner / ffn_blocks; }
  bool is_shared(int layer) const;
  std::vector<int> partitioned_layers() const;

  /// Throws Errc::invalid_input describing the first violated constraint.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Shared layers = first `head` and last `tail` layers of an n-layer model.
std::vector<int> edge_layers(int n_layers, int head, int tail);

const char* activation_name(Activation a);
Activation parse_activation(const std::string& s);

}  // namespace twist
