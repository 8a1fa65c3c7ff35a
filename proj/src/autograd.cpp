// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twist/errors.hpp"

namespace twist {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using CMap = Eigen::Map<const RowMat>;
using SMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using CSMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw Error(Errc::dimension, std::string(op) + " expects a 2-D operand, got " + shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw Error(Errc::dimension,
                std::string(op) + ": shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
}

}  // namespace

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(const Tensor& ref, bool requires_grad) {
  Node n;
  n.ref = &ref;
  n.needs_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  return n.ref ? *n.ref : n.value;
}

std::span<float> Tape::grad(Var v) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  const auto size = static_cast<std::size_t>((n.ref ? *n.ref : n.value).numel());
  if (n.grad.size() != size) n.grad.assign(size, 0.0f);
  return n.grad;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) n.needs_grad = n.needs_grad || needs_grad(in);
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
  if (value(loss).numel() != 1)
    throw Error(Errc::dimension, "backward needs a scalar loss, got " + shape_str(value(loss).shape()));
  if (!needs_grad(loss)) return;
  grad(loss)[0] = 1.0f;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && !n.grad.empty()) n.backward(*this, Var{i});
  }
}

Var matmul(Tape& t, Var a, Var b, bool transpose_b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require_rank2(A, "matmul");
  require_rank2(B, "matmul");
  const auto m = A.dim(0), k = A.dim(1);
  const auto n = transpose_b ? B.dim(0) : B.dim(1);
  const auto kb = transpose_b ? B.dim(1) : B.dim(0);
  if (k != kb)
    throw Error(Errc::dimension, "matmul inner extents differ: " + shape_str(A.shape()) + " x " +
                                     shape_str(B.shape()) + (transpose_b ? "^T" : ""));
  Tensor out({m, n});
  if (transpose_b)
    Map(out.data().data(), m, n).noalias() = CMap(A.data().data(), m, k) * CMap(B.data().data(), n, k).transpose();
  else
    Map(out.data().data(), m, n).noalias() = CMap(A.data().data(), m, k) * CMap(B.data().data(), k, n);
  return t.record(std::move(out), {a, b}, [a, b, m, k, n, transpose_b](Tape& tp, Var self) {
    CMap dy(tp.grad(self).data(), m, n);
    const float* pa = tp.value(a).data().data();
    const float* pb = tp.value(b).data().data();
    if (tp.needs_grad(a)) {
      Map da(tp.grad(a).data(), m, k);
      if (transpose_b)
        da.noalias() += dy * CMap(pb, n, k);
      else
        da.noalias() += dy * CMap(pb, k, n).transpose();
    }
    if (tp.needs_grad(b)) {
      if (transpose_b)
        Map(tp.grad(b).data(), n, k).noalias() += dy.transpose() * CMap(pa, m, k);
      else
        Map(tp.grad(b).data(), k, n).noalias() += CMap(pa, m, k).transpose() * dy;
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require_same_shape(A, B, "add");
  Tensor out(A.shape());
  auto o = out.data();
  auto x = A.data();
  auto y = B.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, Var self) {
    auto g = tp.grad(self);
    for (Var in : {a, b}) {
      if (!tp.needs_grad(in)) continue;
      auto d = tp.grad(in);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
  });
}

Var add_bias(Tape& t, Var x, Var bias) {
  const Tensor& X = t.value(x);
  const Tensor& b = t.value(bias);
  require_rank2(X, "add_bias");
  const auto m = X.dim(0), n = X.dim(1);
  if (b.numel() != n)
    throw Error(Errc::dimension, "add_bias: bias " + shape_str(b.shape()) + " vs input " + shape_str(X.shape()));
  Tensor out(X.shape());
  for (std::int64_t r = 0; r < m; ++r)
    for (std::int64_t c = 0; c < n; ++c) out[r * n + c] = X[r * n + c] + b[c];
  return t.record(std::move(out), {x, bias}, [x, bias, m, n](Tape& tp, Var self) {
    auto g = tp.grad(self);
    if (tp.needs_grad(x)) {
      auto d = tp.grad(x);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
    if (tp.needs_grad(bias)) {
      auto d = tp.grad(bias);
      for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t c = 0; c < n; ++c) d[static_cast<std::size_t>(c)] += g[static_cast<std::size_t>(r * n + c)];
    }
  });
}

Var scale(Tape& t, Var x, float factor) {
  const Tensor& X = t.value(x);
  Tensor out(X.shape());
  for (std::int64_t i = 0; i < X.numel(); ++i) out[i] = X[i] * factor;
  return t.record(std::move(out), {x}, [x, factor](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto d = tp.grad(x);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * factor;
  });
}

Var mask_columns(Tape& t, Var x, std::span<const float> mask) {
  const Tensor& X = t.value(x);
  require_rank2(X, "mask_columns");
  const auto m = X.dim(0), n = X.dim(1);
  if (static_cast<std::int64_t>(mask.size()) != n)
    throw Error(Errc::dimension, "mask_columns: mask of " + std::to_string(mask.size()) + " for " +
                                     shape_str(X.shape()));
  std::vector<float> mk(mask.begin(), mask.end());
  Tensor out(X.shape());
  for (std::int64_t r = 0; r < m; ++r)
    for (std::int64_t c = 0; c < n; ++c) out[r * n + c] = X[r * n + c] * mk[static_cast<std::size_t>(c)];
  return t.record(std::move(out), {x}, [x, m, n, mk = std::move(mk)](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto d = tp.grad(x);
    for (std::int64_t r = 0; r < m; ++r)
      for (std::int64_t c = 0; c < n; ++c) {
        const auto i = static_cast<std::size_t>(r * n + c);
        d[i] += g[i] * mk[static_cast<std::size_t>(c)];
      }
  });
}

Var relu(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  Tensor out(X.shape());
  for (std::int64_t i = 0; i < X.numel(); ++i) out[i] = X[i] > 0.0f ? X[i] : 0.0f;
  return t.record(std::move(out), {x}, [x](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto d = tp.grad(x);
    auto in = tp.value(x).data();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (in[i] > 0.0f) d[i] += g[i];
  });
}

namespace {
constexpr float kGeluC = 0.7978845608028654f;  // sqrt(2/pi)
constexpr float kGeluA = 0.044715f;
}  // namespace

Var gelu(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  Tensor out(X.shape());
  for (std::int64_t i = 0; i < X.numel(); ++i) {
    const float v = X[i];
    out[i] = 0.5f * v * (1.0f + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  return t.record(std::move(out), {x}, [x](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto d = tp.grad(x);
    auto in = tp.value(x).data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const float v = in[i];
      const float th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const float dth = (1.0f - th * th) * kGeluC * (1.0f + 3.0f * kGeluA * v * v);
      d[i] += g[i] * (0.5f * (1.0f + th) + 0.5f * v * dth);
    }
  });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta, float eps) {
  const Tensor& X = t.value(x);
  const Tensor& G = t.value(gamma);
  const Tensor& B = t.value(beta);
  const auto n = X.cols();
  const auto m = X.numel() / std::max<std::int64_t>(n, 1);
  if (n < 2) throw Error(Errc::degenerate, "layer_norm over fewer than 2 features");
  if (G.numel() != n || B.numel() != n)
    throw Error(Errc::dimension, "layer_norm: gamma/beta must have " + std::to_string(n) + " entries");
  Tensor out(X.shape());
  std::vector<float> xhat(static_cast<std::size_t>(X.numel()));
  std::vector<float> rstd(static_cast<std::size_t>(m));
  for (std::int64_t r = 0; r < m; ++r) {
    const float* row = X.data().data() + r * n;
    double mean = 0.0;
    for (std::int64_t c = 0; c < n; ++c) mean += row[c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::int64_t c = 0; c < n; ++c) {
      const double dv = row[c] - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(n);
    const float rs = static_cast<float>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    rstd[static_cast<std::size_t>(r)] = rs;
    for (std::int64_t c = 0; c < n; ++c) {
      const float xh = static_cast<float>(row[c] - mean) * rs;
      xhat[static_cast<std::size_t>(r * n + c)] = xh;
      out[r * n + c] = xh * G[c] + B[c];
    }
  }
  return t.record(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, m, n, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& tp, Var self) {
                    auto g = tp.grad(self);
                    const Tensor& G = tp.value(gamma);
                    if (tp.needs_grad(gamma) || tp.needs_grad(beta)) {
                      std::span<float> dg, db;
                      if (tp.needs_grad(gamma)) dg = tp.grad(gamma);
                      if (tp.needs_grad(beta)) db = tp.grad(beta);
                      for (std::int64_t r = 0; r < m; ++r)
                        for (std::int64_t c = 0; c < n; ++c) {
                          const auto i = static_cast<std::size_t>(r * n + c);
                          if (!dg.empty()) dg[static_cast<std::size_t>(c)] += g[i] * xhat[i];
                          if (!db.empty()) db[static_cast<std::size_t>(c)] += g[i];
                        }
                    }
                    if (!tp.needs_grad(x)) return;
                    auto dx = tp.grad(x);
                    std::vector<float> dxh(static_cast<std::size_t>(n));
                    for (std::int64_t r = 0; r < m; ++r) {
                      double sum = 0.0, dot = 0.0;
                      for (std::int64_t c = 0; c < n; ++c) {
                        const auto i = static_cast<std::size_t>(r * n + c);
                        const float v = g[i] * G[c];
                        dxh[static_cast<std::size_t>(c)] = v;
                        sum += v;
                        dot += static_cast<double>(v) * xhat[i];
                      }
                      const float mean_d = static_cast<float>(sum / static_cast<double>(n));
                      const float mean_dx = static_cast<float>(dot / static_cast<double>(n));
                      const float rs = rstd[static_cast<std::size_t>(r)];
                      for (std::int64_t c = 0; c < n; ++c) {
                        const auto i = static_cast<std::size_t>(r * n + c);
                        dx[i] += rs * (dxh[static_cast<std::size_t>(c)] - mean_d - xhat[i] * mean_dx);
                      }
                    }
                  });
}

namespace {
void softmax_row(const float* in, float* out, std::int64_t n) {
  float mx = -std::numeric_limits<float>::infinity();
  for (std::int64_t c = 0; c < n; ++c) mx = std::max(mx, in[c]);
  double sum = 0.0;
  for (std::int64_t c = 0; c < n; ++c) {
    out[c] = std::exp(in[c] - mx);
    sum += out[c];
  }
  const float inv = static_cast<float>(1.0 / sum);
  for (std::int64_t c = 0; c < n; ++c) out[c] *= inv;
}
}  // namespace

Var softmax_rows(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  const auto n = X.cols();
  const auto m = X.numel() / std::max<std::int64_t>(n, 1);
  Tensor out(X.shape());
  for (std::int64_t r = 0; r < m; ++r) softmax_row(X.data().data() + r * n, out.data().data() + r * n, n);
  return t.record(std::move(out), {x}, [x, m, n](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto y = tp.value(self).data();
    auto d = tp.grad(x);
    for (std::int64_t r = 0; r < m; ++r) {
      double dot = 0.0;
      for (std::int64_t c = 0; c < n; ++c) dot += static_cast<double>(g[r * n + c]) * y[r * n + c];
      for (std::int64_t c = 0; c < n; ++c) {
        const auto i = static_cast<std::size_t>(r * n + c);
        d[i] += y[i] * (g[i] - static_cast<float>(dot));
      }
    }
  });
}

Var embedding(Tape& t, Var table, std::span<const std::int32_t> ids) {
  const Tensor& T = t.value(table);
  require_rank2(T, "embedding");
  const auto rows = T.dim(0), d = T.dim(1);
  std::vector<std::int32_t> idx(ids.begin(), ids.end());
  Tensor out({static_cast<std::int64_t>(idx.size()), d});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= rows)
      throw Error(Errc::invalid_input, "token id " + std::to_string(idx[i]) + " outside table of " +
                                           std::to_string(rows) + " rows");
    std::copy_n(T.data().data() + idx[i] * d, d, out.data().data() + static_cast<std::int64_t>(i) * d);
  }
  return t.record(std::move(out), {table}, [table, d, idx = std::move(idx)](Tape& tp, Var self) {
    auto g = tp.grad(self);
    auto dt = tp.grad(table);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::int64_t c = 0; c < d; ++c)
        dt[static_cast<std::size_t>(idx[i] * d + c)] += g[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
  });
}

Var cross_entropy(Tape& t, Var logits, std::span<const std::int32_t> targets) {
  const Tensor& L = t.value(logits);
  require_rank2(L, "cross_entropy");
  const auto m = L.dim(0), v = L.dim(1);
  if (targets.empty()) throw Error(Errc::invalid_input, "cross_entropy over an empty target sequence");
  if (static_cast<std::int64_t>(targets.size()) != m)
    throw Error(Errc::dimension, "cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                                     std::to_string(m) + " rows");
  std::vector<float> probs(static_cast<std::size_t>(L.numel()));
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  double total = 0.0;
  for (std::int64_t r = 0; r < m; ++r) {
    const auto target = tg[static_cast<std::size_t>(r)];
    if (target < 0 || target >= v)
      throw Error(Errc::invalid_input, "target " + std::to_string(target) + " outside vocabulary");
    const float* row = L.data().data() + r * v;
    float* p = probs.data() + r * v;
    softmax_row(row, p, v);
    float mx = -std::numeric_limits<float>::infinity();
    for (std::int64_t c = 0; c < v; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (std::int64_t c = 0; c < v; ++c) sum += std::exp(static_cast<double>(row[c] - mx));
    total += std::log(sum) + mx - row[target];
  }
  Tensor out({1}, static_cast<float>(total / static_cast<double>(m)));
  return t.record(std::move(out), {logits}, [logits, m, v, probs = std::move(probs), tg = std::move(tg)](Tape& tp, Var self) {
    const float g = tp.grad(self)[0] / static_cast<float>(m);
    auto d = tp.grad(logits);
    for (std::int64_t r = 0; r < m; ++r) {
      for (std::int64_t c = 0; c < v; ++c) {
        const auto i = static_cast<std::size_t>(r * v + c);
        d[i] += g * probs[i];
      }
      d[static_cast<std::size_t>(r * v + tg[static_cast<std::size_t>(r)])] -= g;
    }
  });
}

Var causal_attention(Tape& t, Var q, Var k, Var v, int batch, int seq, int heads, int d_head,
                     std::span<const std::uint8_t> head_active) {
  const Tensor& Q = t.value(q);
  const Tensor& K = t.value(k);
  const Tensor& V = t.value(v);
  const std::int64_t width = static_cast<std::int64_t>(heads) * d_head;
  const Shape expect{static_cast<std::int64_t>(batch) * seq, width};
  if (Q.shape() != expect || K.shape() != expect || V.shape() != expect)
    throw Error(Errc::dimension, "causal_attention: q/k/v must be " + shape_str(expect));
  if (!head_active.empty() && static_cast<int>(head_active.size()) != heads)
    throw Error(Errc::dimension, "causal_attention: head mask length differs from head count");
  std::vector<std::uint8_t> active(static_cast<std::size_t>(heads), 1);
  if (!head_active.empty()) active.assign(head_active.begin(), head_active.end());

  const float sc = 1.0f / std::sqrt(static_cast<float>(d_head));
  const std::int64_t T = seq;
  Tensor out(expect);
  std::vector<float> probs(static_cast<std::size_t>(batch) * heads * T * T, 0.0f);
  RowMat scores(T, T);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      if (!active[static_cast<std::size_t>(h)]) continue;
      const std::int64_t off = b * T * width + static_cast<std::int64_t>(h) * d_head;
      CSMap qm(Q.data().data() + off, T, d_head, Eigen::OuterStride<>(width));
      CSMap km(K.data().data() + off, T, d_head, Eigen::OuterStride<>(width));
      CSMap vm(V.data().data() + off, T, d_head, Eigen::OuterStride<>(width));
      scores.noalias() = qm * km.transpose();
      float* p = probs.data() + (static_cast<std::size_t>(b) * heads + h) * T * T;
      for (std::int64_t i = 0; i < T; ++i) {
        float* prow = p + i * T;
        for (std::int64_t j = 0; j <= i; ++j) prow[j] = scores(i, j) * sc;
        softmax_row(prow, prow, i + 1);
      }
      SMap om(out.data().data() + off, T, d_head, Eigen::OuterStride<>(width));
      om.noalias() = Map(p, T, T) * vm;
    }
  }
  return t.record(std::move(out), {q, k, v},
                  [q, k, v, batch, heads, d_head, T, width, sc, active = std::move(active),
                   probs = std::move(probs)](Tape& tp, Var self) {
                    const float* dy = tp.grad(self).data();
                    const float* pq = tp.value(q).data().data();
                    const float* pk = tp.value(k).data().data();
                    const float* pv = tp.value(v).data().data();
                    float* dq = tp.needs_grad(q) ? tp.grad(q).data() : nullptr;
                    float* dk = tp.needs_grad(k) ? tp.grad(k).data() : nullptr;
                    float* dv = tp.needs_grad(v) ? tp.grad(v).data() : nullptr;
                    RowMat dp(T, T);
                    for (int b = 0; b < batch; ++b) {
                      for (int h = 0; h < heads; ++h) {
                        if (!active[static_cast<std::size_t>(h)]) continue;
                        const std::int64_t off = b * T * width + static_cast<std::int64_t>(h) * d_head;
                        const float* p = probs.data() + (static_cast<std::size_t>(b) * heads + h) * T * T;
                        CMap pm(p, T, T);
                        CSMap dom(dy + off, T, d_head, Eigen::OuterStride<>(width));
                        CSMap vm(pv + off, T, d_head, Eigen::OuterStride<>(width));
                        if (dv) SMap(dv + off, T, d_head, Eigen::OuterStride<>(width)).noalias() += pm.transpose() * dom;
                        if (!dq && !dk) continue;
                        dp.noalias() = dom * vm.transpose();
                        for (std::int64_t i = 0; i < T; ++i) {
                          double dot = 0.0;
                          for (std::int64_t j = 0; j <= i; ++j) dot += static_cast<double>(dp(i, j)) * p[i * T + j];
                          for (std::int64_t j = 0; j <= i; ++j) dp(i, j) = p[i * T + j] * (dp(i, j) - static_cast<float>(dot)) * sc;
                          for (std::int64_t j = i + 1; j < T; ++j) dp(i, j) = 0.0f;
                        }
                        if (dq)
                          SMap(dq + off, T, d_head, Eigen::OuterStride<>(width)).noalias() +=
                              dp * CSMap(pk + off, T, d_head, Eigen::OuterStride<>(width));
                        if (dk)
                          SMap(dk + off, T, d_head, Eigen::OuterStride<>(width)).noalias() +=
                              dp.transpose() * CSMap(pq + off, T, d_head, Eigen::OuterStride<>(width));
                      }
                    }
                  });
}

}  // namespace twist
