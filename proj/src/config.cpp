// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "twist/errors.hpp"
#include "twist/subnet.hpp"

namespace twist {

bool ModelConfig::is_shared(int layer) const {
  return std::find(shared_layers.begin(), shared_layers.end(), layer) != shared_layers.end();
}

std::vector<int> ModelConfig::partitioned_layers() const {
  std::vector<int> out;
  for (int l = 0; l < n_layers; ++l)
    if (!is_shared(l)) out.push_back(l);
  return out;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_input, msg); };
  if (n_layers < 1) fail("n_layers must be >= 1");
  if (d_model < 2) fail("d_model must be >= 2");
  if (n_heads < 1 || d_head < 1) fail("n_heads and d_head must be >= 1");
  if (d_inner < 1 || ffn_blocks < 1) fail("d_inner and ffn_blocks must be >= 1");
  if (d_inner % ffn_blocks != 0)
    fail("d_inner " + std::to_string(d_inner) + " not divisible by ffn_blocks " + std::to_string(ffn_blocks));
  if (vocab < 2) fail("vocab must be >= 2");
  if (context < 1) fail("context must be >= 1");
  std::set<int> seen;
  for (int l : shared_layers) {
    if (l < 0 || l >= n_layers) fail("shared layer " + std::to_string(l) + " outside [0, n_layers)");
    if (!seen.insert(l).second) fail("shared layer " + std::to_string(l) + " listed twice");
  }
}

std::vector<int> edge_layers(int n_layers, int head, int tail) {
  std::set<int> s;
  for (int i = 0; i < head && i < n_layers; ++i) s.insert(i);
  for (int i = 0; i < tail && n_layers - 1 - i >= 0; ++i) s.insert(n_layers - 1 - i);
  return {s.begin(), s.end()};
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "gelu"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "gelu") return Activation::gelu;
  throw Error(Errc::invalid_input, "unknown activation '" + s + "'");
}

const char* scope_name(Scope s) {
  switch (s) {
    case Scope::attn: return "attn";
    case Scope::ffn: return "ffn";
    case Scope::both: return "both";
  }
  return "?";
}

Scope parse_scope(const std::string& s) {
  if (s == "attn") return Scope::attn;
  if (s == "ffn") return Scope::ffn;
  if (s == "both") return Scope::both;
  throw Error(Errc::invalid_input, "unknown scope '" + s + "' (attn|ffn|both)");
}

bool scope_has_attn(Scope s) { return s != Scope::ffn; }
bool scope_has_ffn(Scope s) { return s != Scope::attn; }

Ratio Ratio::parse(const std::string& s, int default_den) {
  Ratio r;
  try {
    std::size_t used = 0;
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      if (default_den <= 0) throw Error(Errc::invalid_ratio, "ratio '" + s + "' needs the form X/Y");
      r.num = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      r.den = default_den;
    } else {
      const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
      r.num = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(s);
      r.den = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(s);
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::invalid_ratio, "cannot parse ratio '" + s + "'");
  }
  if (r.num <= 0 || r.den <= 0 || r.num > r.den)
    throw Error(Errc::invalid_ratio, "ratio " + r.str() + " must lie in (0, 1]");
  return r;
}

int Ratio::kept(int n_full) const {
  if (num <= 0 || den <= 0) throw Error(Errc::invalid_ratio, "ratio " + str() + " must be positive");
  const long long k = (2LL * num * n_full + den) / (2LL * den);
  if (k == 0)
    throw Error(Errc::invalid_ratio, "ratio " + str() + " keeps no block out of " + std::to_string(n_full));
  if (k > n_full)
    throw Error(Errc::invalid_ratio, "ratio " + str() + " keeps more than " + std::to_string(n_full) + " blocks");
  return static_cast<int>(k);
}

std::string Ratio::str() const { return std::to_string(num) + "/" + std::to_string(den); }

namespace {
std::vector<int> iota_vec(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

float scale_for(std::size_t kept, int full, bool on) {
  if (!on || static_cast<int>(kept) == full || kept == 0) return 1.0f;
  return static_cast<float>(std::sqrt(static_cast<double>(full) / static_cast<double>(kept)));
}
}  // namespace

SubnetSpec SubnetSpec::full(const ModelConfig& config, SubnetMode mode) {
  SubnetSpec s;
  s.attn_blocks.assign(static_cast<std::size_t>(config.n_layers), iota_vec(config.n_heads));
  s.ffn_blocks.assign(static_cast<std::size_t>(config.n_layers), iota_vec(config.ffn_blocks));
  s.mode = mode;
  s.scale_correction = config.scale_correction;
  return s;
}

bool SubnetSpec::is_full(const ModelConfig& config) const {
  for (const auto& a : attn_blocks)
    if (static_cast<int>(a.size()) != config.n_heads) return false;
  for (const auto& f : ffn_blocks)
    if (static_cast<int>(f.size()) != config.ffn_blocks) return false;
  return true;
}

float SubnetSpec::attn_scale(const ModelConfig& config, int layer) const {
  return scale_for(attn_blocks.at(static_cast<std::size_t>(layer)).size(), config.n_heads, scale_correction);
}

float SubnetSpec::ffn_scale(const ModelConfig& config, int layer) const {
  return scale_for(ffn_blocks.at(static_cast<std::size_t>(layer)).size(), config.ffn_blocks, scale_correction);
}

void SubnetSpec::validate(const ModelConfig& config) const {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_spec, msg); };
  const auto L = static_cast<std::size_t>(config.n_layers);
  if (attn_blocks.size() != L || ffn_blocks.size() != L)
    fail("spec covers " + std::to_string(attn_blocks.size()) + "/" + std::to_string(ffn_blocks.size()) +
         " layers, model has " + std::to_string(L));
  auto check = [&](const std::vector<int>& blocks, int n_full, int layer, const char* kind, bool must_be_full) {
    if (blocks.empty()) fail(std::string("empty ") + kind + " block list in layer " + std::to_string(layer));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i] < 0 || blocks[i] >= n_full)
        fail(std::string(kind) + " block " + std::to_string(blocks[i]) + " out of range in layer " +
             std::to_string(layer));
      if (i > 0 && blocks[i] <= blocks[i - 1])
        fail(std::string(kind) + " blocks of layer " + std::to_string(layer) + " not strictly ascending");
    }
    if (must_be_full && static_cast<int>(blocks.size()) != n_full)
      fail(std::string(kind) + " blocks of layer " + std::to_string(layer) + " must be complete");
  };
  for (int l = 0; l < config.n_layers; ++l) {
    const bool shared = config.is_shared(l);
    check(attn_blocks[static_cast<std::size_t>(l)], config.n_heads, l, "attention",
          shared || !scope_has_attn(scope));
    check(ffn_blocks[static_cast<std::size_t>(l)], config.ffn_blocks, l, "ffn", shared || !scope_has_ffn(scope));
  }
}

}  // namespace twist
