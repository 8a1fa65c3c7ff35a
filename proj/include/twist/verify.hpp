// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twist/rng.hpp"

namespace twist {

/// One row of a Monte Carlo scaling check.
struct ScalingRow {
  std::string kind;  // "ffn" or "attn"
  double fraction = 1.0;
  double measured = 0.0;   // E||y'|| / E||y||
  double predicted = 0.0;  // sqrt(fraction)
  double abs_err = 0.0;
  double squared_measured = 0.0;  // E||y'||^2 / E||y||^2
  double squared_predicted = 0.0;
  double component_variance = 0.0;  // of the full layer output
  double variance_predicted = 0.0;
};

struct Tolerances {
  double ratio_rel = 0.02;
  double squared_rel = 0.01;
  double variance_rel = 0.10;
};

struct ScalingCheck {
  ScalingRow row;
  bool ratio_ok = false;
  bool squared_ok = false;
  bool variance_ok = false;
  bool ok() const { return ratio_ok && squared_ok && variance_ok; }
};

/// y = C relu(W x), x ~ N(0, I), W ~ N(0, 2/d_model), C ~ N(0, 1/d_inner).
/// The subnet keeps a random fraction of the d_inner units (same x, W, C).
/// Weights are redrawn every `trials_per_draw` inputs.
std::vector<ScalingRow> mc_verify_ffn_scaling(int d_model, int d_inner, const std::vector<double>& fractions,
                                              int trials, Rng& rng, int trials_per_draw = 100);

/// Attention under the uniform-attention surrogate head_h = (1/N) 1 1^T X W^V_h,
/// X ~ N(0, I) of N rows, W^V ~ N(0, 1/d_model), C ~ N(0, 1/(H d_head)).
/// Compares output-row norms of H' kept heads against all H.
std::vector<ScalingRow> mc_verify_attn_scaling(int n_tokens, int d_model, int heads, int d_head,
                                               const std::vector<int>& head_counts, int trials, Rng& rng,
                                               int trials_per_draw = 100);

ScalingCheck check_row(const ScalingRow& row, const Tolerances& tol = {});

}  // namespace twist
