// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "twist/tensor.hpp"

namespace twist {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape for one forward/backward pass. Nodes are appended in
/// evaluation order; backward() walks them in reverse. Leaves either own a
/// value (constants) or reference an external tensor (parameters), in which
/// case the caller keeps the tensor alive for the lifetime of the tape.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Var constant(Tensor value);
  Var leaf(const Tensor& ref, bool requires_grad);

  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }

  /// Gradient buffer of v, allocated (zeroed) on first access.
  std::span<float> grad(Var v);
  bool has_grad(Var v) const { return !nodes_[static_cast<std::size_t>(v.id)].grad.empty(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates. loss must hold one element.
  void backward(Var loss);

  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    bool needs_grad = false;
    std::vector<float> grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. All 2-D operands are row-major [rows x cols].

/// [m x k] . [k x n]; with transpose_b, b is [n x k] and the product is a . b^T.
Var matmul(Tape& t, Var a, Var b, bool transpose_b = false);
Var add(Tape& t, Var a, Var b);
/// x [m x n] + bias [n] broadcast over rows.
Var add_bias(Tape& t, Var x, Var bias);
Var scale(Tape& t, Var x, float factor);
/// Multiplies column j of x by mask[j]; the mask is a constant.
Var mask_columns(Tape& t, Var x, std::span<const float> mask);
Var relu(Tape& t, Var x);
Var gelu(Tape& t, Var x);
/// Row-wise (x - mean) / sqrt(var + eps) * gamma + beta with population variance.
Var layer_norm(Tape& t, Var x, Var gamma, Var beta, float eps = 1e-5f);
Var softmax_rows(Tape& t, Var x);
/// Rows of table selected by ids: result [ids.size() x table.cols].
Var embedding(Tape& t, Var table, std::span<const std::int32_t> ids);
/// Mean token cross-entropy of logits [m x V] against m targets; scalar result.
Var cross_entropy(Tape& t, Var logits, std::span<const std::int32_t> targets);

/// Causal multi-head attention core softmax(QK^T / sqrt(d_head)) V over
/// `batch` sequences of `seq` tokens. q, k, v are [batch*seq x heads*d_head];
/// head h occupies columns [h*d_head, (h+1)*d_head). Heads whose entry in
/// head_active is 0 produce zero output and receive zero gradient.
Var causal_attention(Tape& t, Var q, Var k, Var v, int batch, int seq, int heads, int d_head,
                     std::span<const std::uint8_t> head_active = {});

}  // namespace twist
