// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/cost.hpp"

#include <cmath>

#include "twist/errors.hpp"

namespace twist {

std::vector<std::pair<std::string, std::int64_t>> CostReport::rows() const {
  std::vector<std::pair<std::string, std::int64_t>> r{{"n_embd", n_embd}, {"n_pos", n_pos}, {"n_ln", n_ln}};
  for (std::size_t l = 0; l < n_layer.size(); ++l) {
    r.emplace_back("n_attn." + std::to_string(l), n_attn[l]);
    r.emplace_back("n_ffn." + std::to_string(l), n_ffn[l]);
    r.emplace_back("n_layer." + std::to_string(l), n_layer[l]);
  }
  r.emplace_back("n_final_ln", n_final_ln);
  r.emplace_back("n_proj", n_proj);
  r.emplace_back("n_model", n_model);
  r.emplace_back("n_total", n_total());
  r.emplace_back("memory_bytes", memory_bytes());
  r.emplace_back("training_memory_bytes", training_memory_bytes());
  return r;
}

CostReport count_params_widths(const ModelConfig& c, const std::vector<std::int64_t>& d_attn,
                               const std::vector<std::int64_t>& d_ffn) {
  c.validate();
  const auto L = static_cast<std::size_t>(c.n_layers);
  if (d_attn.size() != L || d_ffn.size() != L)
    throw Error(Errc::invalid_input, "width lists must have one entry per layer");
  const std::int64_t D = c.d_model;
  CostReport r;
  r.n_embd = static_cast<std::int64_t>(c.vocab) * D;
  r.n_pos = static_cast<std::int64_t>(c.context) * D;
  r.n_ln = 2 * D;
  r.n_final_ln = 2 * D;
  r.n_proj = c.tie_projection ? 0 : static_cast<std::int64_t>(c.vocab) * D;
  r.n_model = r.n_embd + r.n_final_ln + r.n_proj;
  for (std::size_t l = 0; l < L; ++l) {
    const std::int64_t a = d_attn[l], f = d_ffn[l];
    if (a < 0 || f < 0) throw Error(Errc::invalid_input, "negative width");
    r.n_attn.push_back(4 * a * D + 3 * a + D);
    r.n_ffn.push_back(2 * f * D + f + D);
    r.n_layer.push_back(2 * r.n_ln + r.n_attn.back() + r.n_ffn.back());
    r.n_model += r.n_layer.back();
  }
  return r;
}

namespace {
std::int64_t kept_units(double frac, int n, const char* what, int layer) {
  if (!(frac > 0.0) || frac > 1.0)
    throw Error(Errc::invalid_sparsity, std::string(what) + " fraction " + std::to_string(frac) + " of layer " +
                                            std::to_string(layer) + " outside (0, 1]");
  const double k = frac * n;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * n)
    throw Error(Errc::invalid_sparsity, std::string(what) + " fraction " + std::to_string(frac) + " of " +
                                            std::to_string(n) + " blocks is not a whole number in layer " +
                                            std::to_string(layer));
  return static_cast<std::int64_t>(r);
}
}  // namespace

CostReport count_params(const ModelConfig& c, const std::vector<double>& alpha, const std::vector<double>& beta) {
  c.validate();
  const auto L = static_cast<std::size_t>(c.n_layers);
  if ((!alpha.empty() && alpha.size() != L) || (!beta.empty() && beta.size() != L))
    throw Error(Errc::invalid_sparsity, "sparsity lists must have one entry per layer");
  std::vector<std::int64_t> da(L), df(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double a = alpha.empty() ? 1.0 : alpha[l];
    const double b = beta.empty() ? 1.0 : beta[l];
    da[l] = kept_units(a, c.n_heads, "attention", static_cast<int>(l)) * c.d_head;
    df[l] = kept_units(b, c.ffn_blocks, "ffn", static_cast<int>(l)) * c.ffn_block_width();
  }
  return count_params_widths(c, da, df);
}

CostReport count_params(const ModelConfig& c, const SubnetSpec& spec) {
  spec.validate(c);
  std::vector<std::int64_t> da, df;
  for (const auto& a : spec.attn_blocks) da.push_back(static_cast<std::int64_t>(a.size()) * c.d_head);
  for (const auto& f : spec.ffn_blocks) df.push_back(static_cast<std::int64_t>(f.size()) * c.ffn_block_width());
  return count_params_widths(c, da, df);
}

std::vector<ModelPreset> gpt2_family() {
  auto make = [](const char* name, int layers, int d_model, int heads) {
    ModelConfig c;
    c.n_layers = layers;
    c.d_model = d_model;
    c.n_heads = heads;
    c.d_head = d_model / heads;
    c.d_inner = 4 * d_model;
    c.ffn_blocks = heads;
    c.vocab = 50257;
    c.context = 1024;
    c.shared_layers.clear();
    c.activation = Activation::gelu;
    c.tie_projection = true;
    return ModelPreset{name, c};
  };
  return {make("gpt2-small", 12, 768, 12), make("gpt2-medium", 24, 1024, 16), make("gpt2-large", 36, 1280, 20),
          make("gpt2-xl", 48, 1600, 25)};
}

ModelPreset find_preset(const std::string& name) {
  for (auto& p : gpt2_family())
    if (p.name == name) return p;
  throw Error(Errc::invalid_input, "unknown preset '" + name + "'");
}

std::vector<MemoryRatioPoint> memory_ratio_curve(const std::vector<ModelPreset>& family, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw Error(Errc::invalid_sparsity, "fraction outside (0, 1]");
  std::vector<MemoryRatioPoint> out;
  for (const auto& p : family) {
    const ModelConfig& c = p.config;
    const auto full = count_params(c);
    const double D = c.d_model;
    double sub = static_cast<double>(full.n_embd + full.n_final_ln + full.n_proj);
    for (int l = 0; l < c.n_layers; ++l) {
      if (c.is_shared(l)) {
        sub += static_cast<double>(full.n_layer[static_cast<std::size_t>(l)]);
        continue;
      }
      const double a = fraction * c.attn_width();
      const double f = fraction * c.d_inner;
      sub += 2.0 * full.n_ln + (4 * a * D + 3 * a + D) + (2 * f * D + f + D);
    }
    MemoryRatioPoint pt;
    pt.name = p.name;
    pt.full_params = full.n_model;
    pt.subnet_params = static_cast<std::int64_t>(std::llround(sub));
    pt.ratio = sub / static_cast<double>(full.n_model);
    pt.ratio_with_positional = (sub + static_cast<double>(full.n_pos)) / static_cast<double>(full.n_total());
    out.push_back(pt);
  }
  return out;
}

double memory_ratio(std::int64_t shared, std::int64_t partitioned, double fraction) {
  const double total = static_cast<double>(shared + partitioned);
  if (total <= 0.0) throw Error(Errc::invalid_input, "empty model");
  return (static_cast<double>(shared) + fraction * static_cast<double>(partitioned)) / total;
}

std::int64_t comm_volume(const ModelConfig& config, const std::vector<std::vector<SubnetSpec>>& schedule,
                         std::int64_t bytes_per_param) {
  std::int64_t total = 0;
  for (const auto& round : schedule)
    for (const auto& spec : round) total += 2 * bytes_per_param * count_params(config, spec).n_total();
  return total;
}

}  // namespace twist
