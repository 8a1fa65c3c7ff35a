// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "twist/errors.hpp"

namespace twist {

std::string names::layer(int l, const char* leaf) { return "layers." + std::to_string(l) + "." + leaf; }

namespace {

// Per-layer leaf names.
constexpr const char* kLnAttnG = "ln_attn.gamma";
constexpr const char* kLnAttnB = "ln_attn.beta";
constexpr const char* kWq = "attn.wq";
constexpr const char* kBq = "attn.bq";
constexpr const char* kWk = "attn.wk";
constexpr const char* kBk = "attn.bk";
constexpr const char* kWv = "attn.wv";
constexpr const char* kBv = "attn.bv";
constexpr const char* kWo = "attn.wo";
constexpr const char* kBo = "attn.bo";
constexpr const char* kLnFfnG = "ln_ffn.gamma";
constexpr const char* kLnFfnB = "ln_ffn.beta";
constexpr const char* kWin = "ffn.w_in";
constexpr const char* kBin = "ffn.b_in";
constexpr const char* kWout = "ffn.w_out";
constexpr const char* kBout = "ffn.b_out";

using I64 = std::int64_t;

Tensor normal_tensor(Shape shape, double variance, Rng& rng) {
  Tensor t(std::move(shape));
  rng.fill_normal(t.data(), 0.0f, static_cast<float>(std::sqrt(variance)));
  return t;
}

// Kept widths of a layer for the given spec (full widths without a spec).
struct LayerWidths {
  I64 attn;
  I64 ffn;
};

LayerWidths layer_widths(const ModelConfig& c, const SubnetSpec* spec, int l, bool physical) {
  if (!physical || spec == nullptr) return {c.attn_width(), c.d_inner};
  const auto L = static_cast<std::size_t>(l);
  return {static_cast<I64>(spec->attn_blocks[L].size()) * c.d_head,
          static_cast<I64>(spec->ffn_blocks[L].size()) * c.ffn_block_width()};
}

void expect_shape(const ParameterStore& p, const std::string& name, const Shape& shape) {
  const Tensor& t = p.at(name);
  if (t.shape() != shape)
    throw Error(Errc::invalid_spec, "parameter '" + name + "' is " + shape_str(t.shape()) + ", expected " +
                                        shape_str(shape));
}

struct Graph {
  Tape tape;
  std::map<std::string, Var> leaves;
};

Var leaf(Graph& g, const ParameterStore& p, const std::string& name, bool grad) {
  auto it = g.leaves.find(name);
  if (it != g.leaves.end()) return it->second;
  Var v = g.tape.leaf(p.at(name), grad);
  g.leaves.emplace(name, v);
  return v;
}

Var build(Graph& g, const ModelConfig& c, const ParameterStore& p, const TokenBatch& b, const SubnetSpec* spec,
          bool grad) {
  c.validate();
  if (spec) spec->validate(c);
  if (b.batch < 1 || b.seq < 1) throw Error(Errc::invalid_input, "empty token batch");
  if (b.seq > c.context)
    throw Error(Errc::invalid_input, "sequence length " + std::to_string(b.seq) + " exceeds context " +
                                         std::to_string(c.context));
  const auto n_tok = static_cast<std::size_t>(b.batch) * static_cast<std::size_t>(b.seq);
  if (b.inputs.size() != n_tok) throw Error(Errc::invalid_input, "token batch size mismatch");
  for (auto id : b.inputs)
    if (id < 0 || id >= c.vocab)
      throw Error(Errc::invalid_input, "token id " + std::to_string(id) + " outside vocabulary of " +
                                           std::to_string(c.vocab));

  const bool physical = spec && spec->mode == SubnetMode::physical;
  Tape& t = g.tape;
  auto P = [&](const std::string& name) { return leaf(g, p, name, grad); };

  std::vector<std::int32_t> pos(n_tok);
  for (std::size_t i = 0; i < n_tok; ++i) pos[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(b.seq));
  Var x = add(t, embedding(t, P(names::tok_emb), b.inputs), embedding(t, P(names::pos_emb), pos));

  for (int l = 0; l < c.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    auto N = [&](const char* leaf_name) { return names::layer(l, leaf_name); };
    const LayerWidths w = layer_widths(c, spec, l, physical);
    if (physical) {
      expect_shape(p, N(kWq), {c.d_model, w.attn});
      expect_shape(p, N(kWin), {c.d_model, w.ffn});
    }

    // Attention sublayer.
    Var h = layer_norm(t, x, P(N(kLnAttnG)), P(N(kLnAttnB)));
    Var q = add_bias(t, matmul(t, h, P(N(kWq))), P(N(kBq)));
    Var k = add_bias(t, matmul(t, h, P(N(kWk))), P(N(kBk)));
    Var v = add_bias(t, matmul(t, h, P(N(kWv))), P(N(kBv)));
    std::vector<std::uint8_t> head_mask;
    int heads = c.n_heads;
    if (physical) {
      heads = static_cast<int>(spec->attn_blocks[L].size());
    } else if (spec && static_cast<int>(spec->attn_blocks[L].size()) != c.n_heads) {
      head_mask.assign(static_cast<std::size_t>(c.n_heads), 0);
      for (int hd : spec->attn_blocks[L]) head_mask[static_cast<std::size_t>(hd)] = 1;
    }
    Var a = causal_attention(t, q, k, v, b.batch, b.seq, heads, c.d_head, head_mask);
    Var o = add_bias(t, matmul(t, a, P(N(kWo))), P(N(kBo)));
    if (spec) {
      const float s = spec->attn_scale(c, l);
      if (s != 1.0f) o = scale(t, o, s);
    }
    x = add(t, x, o);

    // Feed-forward sublayer.
    Var h2 = layer_norm(t, x, P(N(kLnFfnG)), P(N(kLnFfnB)));
    Var u = add_bias(t, matmul(t, h2, P(N(kWin))), P(N(kBin)));
    u = c.activation == Activation::relu ? relu(t, u) : gelu(t, u);
    if (!physical && spec && static_cast<int>(spec->ffn_blocks[L].size()) != c.ffn_blocks) {
      std::vector<float> mask(static_cast<std::size_t>(c.d_inner), 0.0f);
      const int bw = c.ffn_block_width();
      for (int r : spec->ffn_blocks[L])
        for (int j = r * bw; j < (r + 1) * bw; ++j) mask[static_cast<std::size_t>(j)] = 1.0f;
      u = mask_columns(t, u, mask);
    }
    Var f = add_bias(t, matmul(t, u, P(N(kWout))), P(N(kBout)));
    if (spec) {
      const float s = spec->ffn_scale(c, l);
      if (s != 1.0f) f = scale(t, f, s);
    }
    x = add(t, x, f);
  }
  Var hf = layer_norm(t, x, P(names::ln_f_gamma), P(names::ln_f_beta));
  return matmul(t, hf, P(c.tie_projection ? names::tok_emb : names::proj), true);
}

}  // namespace

ParameterStore init_params(const ModelConfig& c, Rng& rng) {
  c.validate();
  ParameterStore p;
  const I64 D = c.d_model, A = c.attn_width(), F = c.d_inner;
  const double inv_d = 1.0 / static_cast<double>(D);
  p.insert(names::tok_emb, normal_tensor({c.vocab, D}, inv_d, rng));
  p.insert(names::pos_emb, normal_tensor({c.context, D}, inv_d, rng));
  if (!c.tie_projection) p.insert(names::proj, normal_tensor({c.vocab, D}, inv_d, rng));
  for (int l = 0; l < c.n_layers; ++l) {
    auto N = [&](const char* leaf_name) { return names::layer(l, leaf_name); };
    p.insert(N(kLnAttnG), Tensor({D}, 1.0f));
    p.insert(N(kLnAttnB), Tensor({D}));
    p.insert(N(kWq), normal_tensor({D, A}, inv_d, rng));
    p.insert(N(kWk), normal_tensor({D, A}, inv_d, rng));
    p.insert(N(kWv), normal_tensor({D, A}, inv_d, rng));
    p.insert(N(kBq), Tensor({A}));
    p.insert(N(kBk), Tensor({A}));
    p.insert(N(kBv), Tensor({A}));
    p.insert(N(kWo), normal_tensor({A, D}, 1.0 / static_cast<double>(A), rng));
    p.insert(N(kBo), Tensor({D}));
    p.insert(N(kLnFfnG), Tensor({D}, 1.0f));
    p.insert(N(kLnFfnB), Tensor({D}));
    p.insert(N(kWin), normal_tensor({D, F}, 2.0 * inv_d, rng));
    p.insert(N(kBin), Tensor({F}));
    p.insert(N(kWout), normal_tensor({F, D}, 1.0 / static_cast<double>(F), rng));
    p.insert(N(kBout), Tensor({D}));
  }
  p.insert(names::ln_f_gamma, Tensor({D}, 1.0f));
  p.insert(names::ln_f_beta, Tensor({D}));
  return p;
}

Tensor forward(const ModelConfig& config, const ParameterStore& params, const TokenBatch& batch,
               const SubnetSpec* spec) {
  Graph g;
  Var logits = build(g, config, params, batch, spec, false);
  return g.tape.value(logits);
}

namespace {
void check_targets(const ModelConfig& c, const TokenBatch& b) {
  if (b.targets.empty()) throw Error(Errc::invalid_input, "empty target sequence");
  if (b.targets.size() != b.inputs.size()) throw Error(Errc::invalid_input, "targets and inputs differ in length");
  for (auto id : b.targets)
    if (id < 0 || id >= c.vocab) throw Error(Errc::invalid_input, "target id " + std::to_string(id) + " outside vocabulary");
}
}  // namespace

double loss(const ModelConfig& config, const ParameterStore& params, const TokenBatch& batch,
            const SubnetSpec* spec) {
  check_targets(config, batch);
  Graph g;
  Var logits = build(g, config, params, batch, spec, false);
  Var l = cross_entropy(g.tape, logits, batch.targets);
  return g.tape.value(l)[0];
}

double loss_and_grad(const ModelConfig& config, ParameterStore& params, const TokenBatch& batch,
                     const SubnetSpec* spec) {
  check_targets(config, batch);
  Graph g;
  Var logits = build(g, config, params, batch, spec, true);
  Var l = cross_entropy(g.tape, logits, batch.targets);
  const double value = g.tape.value(l)[0];
  if (!std::isfinite(value)) throw Error(Errc::numeric, "non-finite loss");
  g.tape.backward(l);
  for (auto& [name, tensor] : params) {
    auto dst = tensor.ensure_grad();
    std::fill(dst.begin(), dst.end(), 0.0f);
    auto it = g.leaves.find(name);
    if (it == g.leaves.end() || !g.tape.has_grad(it->second)) continue;
    auto src = g.tape.grad(it->second);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return value;
}

namespace {

std::vector<float> gather_cols(const Tensor& t, const std::vector<int>& blocks, I64 bw) {
  const I64 rows = t.rows(), cols = t.cols();
  const I64 out_cols = static_cast<I64>(blocks.size()) * bw;
  std::vector<float> out(static_cast<std::size_t>(rows * out_cols));
  for (I64 r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (I64 j = 0; j < bw; ++j)
        out[static_cast<std::size_t>(r * out_cols + static_cast<I64>(i) * bw + j)] = t[r * cols + blocks[i] * bw + j];
  return out;
}

// Rows of a 2-D tensor, or elements of a rank-1 tensor.
std::vector<float> gather_rows(const Tensor& t, const std::vector<int>& blocks, I64 bw) {
  const I64 width = t.rank() == 1 ? 1 : t.cols();
  std::vector<float> out;
  out.reserve(blocks.size() * static_cast<std::size_t>(bw * width));
  for (int blk : blocks) {
    auto src = t.data().subspan(static_cast<std::size_t>(blk * bw * width), static_cast<std::size_t>(bw * width));
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

}  // namespace

ParameterStore extract_physical_subnet(const ModelConfig& c, const ParameterStore& params, const SubnetSpec& spec) {
  c.validate();
  spec.validate(c);
  ParameterStore out;
  for (const auto& name : shared_param_names(c)) out.insert(name, params.at(name));
  const I64 D = c.d_model, dh = c.d_head, bw = c.ffn_block_width();
  for (int l = 0; l < c.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    auto N = [&](const char* leaf_name) { return names::layer(l, leaf_name); };
    const auto& heads = spec.attn_blocks[L];
    const auto& blocks = spec.ffn_blocks[L];
    const I64 A = static_cast<I64>(heads.size()) * dh;
    const I64 F = static_cast<I64>(blocks.size()) * bw;
    for (const char* w : {kWq, kWk, kWv}) out.insert(N(w), Tensor({D, A}, gather_cols(params.at(N(w)), heads, dh)));
    for (const char* bb : {kBq, kBk, kBv}) out.insert(N(bb), Tensor({A}, gather_rows(params.at(N(bb)), heads, dh)));
    out.insert(N(kWo), Tensor({A, D}, gather_rows(params.at(N(kWo)), heads, dh)));
    out.insert(N(kWin), Tensor({D, F}, gather_cols(params.at(N(kWin)), blocks, bw)));
    out.insert(N(kBin), Tensor({F}, gather_rows(params.at(N(kBin)), blocks, bw)));
    out.insert(N(kWout), Tensor({F, D}, gather_rows(params.at(N(kWout)), blocks, bw)));
  }
  return out;
}

std::int64_t subnet_param_count(const ModelConfig& c, const SubnetSpec& spec) {
  c.validate();
  spec.validate(c);
  const I64 D = c.d_model;
  I64 n = static_cast<I64>(c.vocab) * D + static_cast<I64>(c.context) * D + 2 * D;
  if (!c.tie_projection) n += static_cast<I64>(c.vocab) * D;
  for (int l = 0; l < c.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    const I64 A = static_cast<I64>(spec.attn_blocks[L].size()) * c.d_head;
    const I64 F = static_cast<I64>(spec.ffn_blocks[L].size()) * c.ffn_block_width();
    n += 4 * D;                  // two layer norms
    n += 4 * A * D + 3 * A + D;  // q, k, v, o and biases
    n += 2 * F * D + F + D;      // ffn
  }
  return n;
}

std::vector<Slice> attn_block_slices(const ModelConfig& c, int layer, int head) {
  const I64 b = static_cast<I64>(head) * c.d_head, e = b + c.d_head;
  auto N = [&](const char* leaf_name) { return names::layer(layer, leaf_name); };
  return {Slice{N(kWq), 1, b, e}, Slice{N(kBq), 0, b, e}, Slice{N(kWk), 1, b, e}, Slice{N(kBk), 0, b, e},
          Slice{N(kWv), 1, b, e}, Slice{N(kBv), 0, b, e}, Slice{N(kWo), 0, b, e}};
}

std::vector<Slice> ffn_block_slices(const ModelConfig& c, int layer, int block) {
  const I64 b = static_cast<I64>(block) * c.ffn_block_width(), e = b + c.ffn_block_width();
  auto N = [&](const char* leaf_name) { return names::layer(layer, leaf_name); };
  return {Slice{N(kWin), 1, b, e}, Slice{N(kBin), 0, b, e}, Slice{N(kWout), 0, b, e}};
}

std::vector<std::string> shared_param_names(const ModelConfig& c) {
  std::vector<std::string> out{names::tok_emb, names::pos_emb};
  if (!c.tie_projection) out.push_back(names::proj);
  out.push_back(names::ln_f_gamma);
  out.push_back(names::ln_f_beta);
  for (int l = 0; l < c.n_layers; ++l)
    for (const char* leaf_name : {kLnAttnG, kLnAttnB, kBo, kLnFfnG, kLnFfnB, kBout})
      out.push_back(names::layer(l, leaf_name));
  return out;
}

std::vector<std::string> attn_block_param_names(int layer) {
  std::vector<std::string> out;
  for (const char* leaf_name : {kWq, kBq, kWk, kBk, kWv, kBv, kWo}) out.push_back(names::layer(layer, leaf_name));
  return out;
}

std::vector<std::string> ffn_block_param_names(int layer) {
  std::vector<std::string> out;
  for (const char* leaf_name : {kWin, kBin, kWout}) out.push_back(names::layer(layer, leaf_name));
  return out;
}

std::vector<SliceMapping> subnet_slice_mapping(const ModelConfig& c, const SubnetSpec& spec) {
  spec.validate(c);
  const bool physical = spec.mode == SubnetMode::physical;
  std::vector<SliceMapping> out;
  for (const auto& name : shared_param_names(c)) out.push_back({Slice::whole(name), Slice::whole(name)});
  for (int l = 0; l < c.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    const auto& heads = spec.attn_blocks[L];
    for (std::size_t i = 0; i < heads.size(); ++i) {
      auto central = attn_block_slices(c, l, heads[i]);
      auto local = physical ? attn_block_slices(c, l, static_cast<int>(i)) : central;
      for (std::size_t j = 0; j < central.size(); ++j) out.push_back({central[j], local[j]});
    }
    const auto& blocks = spec.ffn_blocks[L];
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto central = ffn_block_slices(c, l, blocks[i]);
      auto local = physical ? ffn_block_slices(c, l, static_cast<int>(i)) : central;
      for (std::size_t j = 0; j < central.size(); ++j) out.push_back({central[j], local[j]});
    }
  }
  return out;
}

}  // namespace twist
