// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/blueprint.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "twist/errors.hpp"

namespace twist {

int min_feasible_subnet_blocks(int n_full, int workers, int n_common) {
  if (workers < 1) throw Error(Errc::invalid_input, "worker count must be >= 1");
  const long long num = static_cast<long long>(n_full) + static_cast<long long>(workers - 1) * n_common;
  return static_cast<int>((num + workers - 1) / workers);
}

Blueprint generate_blueprint(int n_full, int workers, int n_sub, std::span<const int> common, Rng& rng,
                             int layer_id) {
  if (n_full < 1) throw Error(Errc::invalid_input, "N_full must be >= 1");
  if (workers < 1) throw Error(Errc::invalid_input, "worker count must be >= 1");
  std::vector<char> in_common(static_cast<std::size_t>(n_full), 0);
  for (int c : common) {
    if (c < 0 || c >= n_full)
      throw Error(Errc::invalid_input, "common block " + std::to_string(c) + " outside [0, " + std::to_string(n_full) + ")");
    if (in_common[static_cast<std::size_t>(c)])
      throw Error(Errc::invalid_input, "common block " + std::to_string(c) + " listed twice");
    in_common[static_cast<std::size_t>(c)] = 1;
  }
  const int n_common = static_cast<int>(common.size());
  const int lower = min_feasible_subnet_blocks(n_full, workers, n_common);
  if (n_sub < lower || n_sub > n_full || n_sub < n_common)
    throw Error(Errc::infeasible, "N_sub=" + std::to_string(n_sub) + " outside [" + std::to_string(lower) + ", " +
                                      std::to_string(n_full) + "] required by (N_full + (S-1)|C|)/S <= N_sub <= N_full with N_full=" +
                                      std::to_string(n_full) + ", S=" + std::to_string(workers) +
                                      ", |C|=" + std::to_string(n_common));

  Blueprint bp;
  bp.layer_id = layer_id;
  bp.n_full = n_full;
  bp.common.assign(common.begin(), common.end());
  std::sort(bp.common.begin(), bp.common.end());

  const auto S = static_cast<std::size_t>(workers);
  std::vector<std::vector<char>> held(S, std::vector<char>(static_cast<std::size_t>(n_full), 0));
  bp.assignments.assign(S, {});
  auto place = [&](std::size_t s, int b) {
    bp.assignments[s].push_back(b);
    held[s][static_cast<std::size_t>(b)] = 1;
  };

  // Phase 1: common blocks everywhere.
  for (std::size_t s = 0; s < S; ++s)
    for (int c : bp.common) place(s, c);

  // Phase 2: every other block once, dealt round-robin in random order.
  std::vector<int> rest;
  for (int b = 0; b < n_full; ++b)
    if (!in_common[static_cast<std::size_t>(b)]) rest.push_back(b);
  rng.shuffle(rest);
  for (std::size_t i = 0; i < rest.size(); ++i) place(i % S, rest[i]);

  // Phase 3: top up each row from the blocks it lacks.
  for (std::size_t s = 0; s < S; ++s) {
    const auto missing = static_cast<std::size_t>(n_sub) - bp.assignments[s].size();
    if (missing == 0) continue;
    std::vector<int> pool;
    for (int b = 0; b < n_full; ++b)
      if (!held[s][static_cast<std::size_t>(b)]) pool.push_back(b);
    for (int b : rng.sample(pool, missing)) place(s, b);
  }
  for (auto& row : bp.assignments) std::sort(row.begin(), row.end());
  return bp;
}

std::string BlueprintReport::str() const {
  std::ostringstream os;
  auto list = [&](const std::vector<int>& v) {
    os << '{';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '}';
  };
  os << "(i) common in every row: " << (contains_common ? "pass" : "FAIL");
  if (!contains_common) os << " rows ", list(rows_missing_common);
  os << "; (ii) every block assigned: " << (covers_all ? "pass" : "FAIL");
  if (!covers_all) os << " unassigned ", list(unassigned_blocks);
  os << "; (iii) row sizes: " << (size_ok ? "pass" : "FAIL");
  if (!size_ok) os << " rows ", list(bad_rows);
  os << "; bound: " << (bound_ok ? "pass" : "FAIL");
  return os.str();
}

BlueprintReport validate_blueprint(const Blueprint& bp) {
  BlueprintReport r;
  const int n_sub = bp.n_sub();
  std::vector<int> count(static_cast<std::size_t>(std::max(bp.n_full, 0)), 0);
  for (int s = 0; s < bp.workers(); ++s) {
    const auto& row = bp.assignments[static_cast<std::size_t>(s)];
    std::set<int> uniq;
    bool bad = static_cast<int>(row.size()) != n_sub;
    for (int b : row) {
      if (b < 0 || b >= bp.n_full || !uniq.insert(b).second) {
        bad = true;
        continue;
      }
      ++count[static_cast<std::size_t>(b)];
    }
    if (bad) r.bad_rows.push_back(s);
    for (int c : bp.common)
      if (!uniq.count(c)) {
        r.rows_missing_common.push_back(s);
        break;
      }
  }
  for (int b = 0; b < bp.n_full; ++b)
    if (count[static_cast<std::size_t>(b)] == 0) r.unassigned_blocks.push_back(b);
  r.contains_common = r.rows_missing_common.empty();
  r.covers_all = r.unassigned_blocks.empty() && bp.workers() > 0;
  r.size_ok = r.bad_rows.empty();
  const auto nc = static_cast<long long>(bp.common.size());
  r.bound_ok = bp.workers() > 0 && n_sub <= bp.n_full &&
               static_cast<long long>(bp.n_full) + (bp.workers() - 1) * nc <= static_cast<long long>(n_sub) * bp.workers();
  return r;
}

SubnetSpec deployment_spec(const ModelConfig& config, Ratio ratio, Scope scope, Rng& rng, SubnetMode mode) {
  config.validate();
  SubnetSpec spec = SubnetSpec::full(config, mode);
  spec.scope = scope;
  const int kh = scope_has_attn(scope) ? ratio.kept(config.n_heads) : config.n_heads;
  const int kf = scope_has_ffn(scope) ? ratio.kept(config.ffn_blocks) : config.ffn_blocks;
  std::vector<int> heads(static_cast<std::size_t>(config.n_heads)), blocks(static_cast<std::size_t>(config.ffn_blocks));
  std::iota(heads.begin(), heads.end(), 0);
  std::iota(blocks.begin(), blocks.end(), 0);
  for (int l : config.partitioned_layers()) {
    const auto L = static_cast<std::size_t>(l);
    if (scope_has_attn(scope)) {
      spec.attn_blocks[L] = rng.sample(heads, static_cast<std::size_t>(kh));
      std::sort(spec.attn_blocks[L].begin(), spec.attn_blocks[L].end());
    }
    if (scope_has_ffn(scope)) {
      spec.ffn_blocks[L] = rng.sample(blocks, static_cast<std::size_t>(kf));
      std::sort(spec.ffn_blocks[L].begin(), spec.ffn_blocks[L].end());
    }
  }
  return spec;
}

BlueprintSet generate_round_blueprints(const ModelConfig& config, int workers, Ratio ratio, Scope scope, Rng& rng) {
  config.validate();
  BlueprintSet set(static_cast<std::size_t>(config.n_layers));
  const std::vector<int> none;
  for (int l : config.partitioned_layers()) {
    auto& lb = set[static_cast<std::size_t>(l)];
    if (scope_has_attn(scope))
      lb.attn = generate_blueprint(config.n_heads, workers, ratio.kept(config.n_heads), none, rng, l);
    if (scope_has_ffn(scope))
      lb.ffn = generate_blueprint(config.ffn_blocks, workers, ratio.kept(config.ffn_blocks), none, rng, l);
  }
  return set;
}

std::string blueprint_text(const Blueprint& bp, const char* kind) {
  std::ostringstream os;
  os << "blueprint layer=" << bp.layer_id << " kind=" << kind << " n_full=" << bp.n_full << " n_sub=" << bp.n_sub()
     << " common=[";
  for (std::size_t i = 0; i < bp.common.size(); ++i) os << (i ? "," : "") << bp.common[i];
  os << "]\n";
  for (int s = 0; s < bp.workers(); ++s) {
    os << "  worker " << s << ":";
    for (int b : bp.assignments[static_cast<std::size_t>(s)]) os << ' ' << b;
    os << '\n';
  }
  return os.str();
}

}  // namespace twist
