// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures for the unit tests, plus a slow double-precision reference
// forward pass written with plain loops (no tape, no Eigen).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "twist/config.hpp"
#include "twist/model.hpp"
#include "twist/parameter_store.hpp"
#include "twist/rng.hpp"
#include "twist/subnet.hpp"

namespace twist::testing {

inline ModelConfig tiny_config() {
  ModelConfig c;
  c.n_layers = 3;
  c.d_model = 16;
  c.n_heads = 4;
  c.d_head = 4;
  c.d_inner = 32;
  c.ffn_blocks = 4;
  c.vocab = 11;
  c.context = 8;
  c.shared_layers = {0};
  return c;
}

inline TokenBatch random_batch(const ModelConfig& c, int batch, int seq, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> tok(0, c.vocab - 1);
  TokenBatch b{batch, seq, {}, {}};
  for (int i = 0; i < batch * seq; ++i) {
    b.inputs.push_back(tok(g));
    b.targets.push_back(tok(g));
  }
  return b;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("twist_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

// ||a - b|| / max(||b||, floor)
inline double rel_err(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

// ---------------------------------------------------------------- reference

using Mat = std::vector<std::vector<double>>;

inline Mat ref_param(const ParameterStore& p, const std::string& name) {
  const Tensor& t = p.at(name);
  const auto rows = t.rank() == 1 ? 1 : t.dim(0);
  const auto cols = t.rank() == 1 ? t.dim(0) : t.dim(1);
  Mat m(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) m[r][c] = t[r * cols + c];
  return m;
}

inline std::vector<double> ref_layer_norm(const std::vector<double>& x, const Mat& g, const Mat& b) {
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / std::sqrt(var + 1e-5) * g[0][i] + b[0][i];
  return y;
}

// x [d_in] times W [d_in x d_out] plus bias.
inline std::vector<double> ref_affine(const std::vector<double>& x, const Mat& w, const Mat* bias) {
  std::vector<double> y(w[0].size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * w[i][j];
  if (bias)
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += (*bias)[0][j];
  return y;
}

// Logits [B*T][V] of the full-width model with an optional subnet applied by
// zeroing dropped heads / units (the mask semantics), with the sublayer
// scale sqrt(N_full / N_sub) when the SubnetSpec asks for it.
inline Mat reference_logits(const ModelConfig& c, const ParameterStore& p, const TokenBatch& b,
                            const SubnetSpec* spec = nullptr) {
  const int T = b.seq, D = c.d_model, H = c.n_heads, dh = c.d_head, F = c.d_inner;
  const Mat tok = ref_param(p, "tok_emb"), pos = ref_param(p, "pos_emb");
  Mat out;
  for (int bi = 0; bi < b.batch; ++bi) {
    Mat x(static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(D)));
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d) x[t][d] = tok[b.inputs[bi * T + t]][d] + pos[t][d];
    for (int l = 0; l < c.n_layers; ++l) {
      auto P = [&](const char* leaf) { return ref_param(p, names::layer(l, leaf)); };
      const Mat g1 = P("ln_attn.gamma"), b1 = P("ln_attn.beta"), wq = P("attn.wq"), bq = P("attn.bq"),
                wk = P("attn.wk"), bk = P("attn.bk"), wv = P("attn.wv"), bv = P("attn.bv"), wo = P("attn.wo"),
                bo = P("attn.bo"), g2 = P("ln_ffn.gamma"), b2 = P("ln_ffn.beta"), wi = P("ffn.w_in"),
                bin = P("ffn.b_in"), wout = P("ffn.w_out"), bout = P("ffn.b_out");
      std::vector<char> head_on(static_cast<std::size_t>(H), 1), unit_on(static_cast<std::size_t>(F), 1);
      double sa = 1.0, sf = 1.0;
      if (spec) {
        std::fill(head_on.begin(), head_on.end(), 0);
        std::fill(unit_on.begin(), unit_on.end(), 0);
        for (int h : spec->attn_blocks[l]) head_on[h] = 1;
        const int bw = F / c.ffn_blocks;
        for (int r : spec->ffn_blocks[l])
          for (int j = r * bw; j < (r + 1) * bw; ++j) unit_on[j] = 1;
        if (spec->scale_correction) {
          sa = std::sqrt(static_cast<double>(H) / static_cast<double>(spec->attn_blocks[l].size()));
          sf = std::sqrt(static_cast<double>(c.ffn_blocks) / static_cast<double>(spec->ffn_blocks[l].size()));
        }
      }
      Mat q, k, v;
      for (int t = 0; t < T; ++t) {
        const auto h = ref_layer_norm(x[t], g1, b1);
        q.push_back(ref_affine(h, wq, &bq));
        k.push_back(ref_affine(h, wk, &bk));
        v.push_back(ref_affine(h, wv, &bv));
      }
      for (int t = 0; t < T; ++t) {
        std::vector<double> a(static_cast<std::size_t>(H * dh), 0.0);
        for (int hd = 0; hd < H; ++hd) {
          if (!head_on[hd]) continue;
          std::vector<double> s(static_cast<std::size_t>(t + 1));
          double mx = -1e300;
          for (int u = 0; u <= t; ++u) {
            double dot = 0.0;
            for (int j = 0; j < dh; ++j) dot += q[t][hd * dh + j] * k[u][hd * dh + j];
            s[u] = dot / std::sqrt(static_cast<double>(dh));
            mx = std::max(mx, s[u]);
          }
          double z = 0.0;
          for (auto& e : s) z += (e = std::exp(e - mx));
          for (int u = 0; u <= t; ++u)
            for (int j = 0; j < dh; ++j) a[hd * dh + j] += s[u] / z * v[u][hd * dh + j];
        }
        const auto o = ref_affine(a, wo, &bo);
        for (int d = 0; d < D; ++d) x[t][d] += sa * o[d];
      }
      for (int t = 0; t < T; ++t) {
        auto u = ref_affine(ref_layer_norm(x[t], g2, b2), wi, &bin);
        for (int j = 0; j < F; ++j) {
          const double z = u[j];
          u[j] = c.activation == Activation::relu
                     ? std::max(0.0, z)
                     : 0.5 * z * (1.0 + std::tanh(0.7978845608028654 * (z + 0.044715 * z * z * z)));
          if (!unit_on[j]) u[j] = 0.0;
        }
        const auto f = ref_affine(u, wout, &bout);
        for (int d = 0; d < D; ++d) x[t][d] += sf * f[d];
      }
    }
    const Mat gf = ref_param(p, "ln_f.gamma"), bf = ref_param(p, "ln_f.beta");
    const Mat proj = ref_param(p, c.tie_projection ? "tok_emb" : "proj");
    for (int t = 0; t < T; ++t) {
      const auto h = ref_layer_norm(x[t], gf, bf);
      std::vector<double> logits(static_cast<std::size_t>(c.vocab), 0.0);
      for (int vv = 0; vv < c.vocab; ++vv)
        for (int d = 0; d < D; ++d) logits[vv] += h[d] * proj[vv][d];
      out.push_back(std::move(logits));
    }
  }
  return out;
}

inline double reference_loss(const ModelConfig& c, const ParameterStore& p, const TokenBatch& b,
                             const SubnetSpec* spec = nullptr) {
  const Mat logits = reference_logits(c, p, b, spec);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double mx = *std::max_element(logits[i].begin(), logits[i].end());
    double z = 0.0;
    for (double v : logits[i]) z += std::exp(v - mx);
    total += mx + std::log(z) - logits[i][b.targets[i]];
  }
  return total / static_cast<double>(logits.size());
}

}  // namespace twist::testing
