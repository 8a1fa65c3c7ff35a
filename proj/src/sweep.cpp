// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twist/blueprint.hpp"
#include "twist/data.hpp"
#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/orchestrator.hpp"
#include "twist/rng.hpp"

namespace twist {

namespace {

bool same_ratio(Ratio a, Ratio b) { return static_cast<long long>(a.num) * b.den == static_cast<long long>(b.num) * a.den; }

SweepCell summarize(std::vector<double> values) {
  SweepCell c;
  c.n = static_cast<int>(values.size());
  if (values.empty()) return c;
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / c.n;
  double ss = 0.0;
  for (double v : values) ss += (v - c.mean) * (v - c.mean);
  c.stddev = c.n > 1 ? std::sqrt(ss / (c.n - 1)) : 0.0;
  c.min = *std::min_element(values.begin(), values.end());
  c.max = *std::max_element(values.begin(), values.end());
  c.values = std::move(values);
  return c;
}

void check_data(const SweepData& d) {
  if (!d.tokens) throw Error(Errc::invalid_input, "sweep without evaluation tokens");
}

std::vector<SubnetSpec> draw_specs(const ModelConfig& config, Ratio ratio, int n, Scope scope, std::uint64_t seed,
                                   std::size_t ratio_index) {
  std::vector<SubnetSpec> out;
  for (int i = 0; i < n; ++i) {
    Rng rng(seed, stream_id("deploy", ratio_index, static_cast<std::uint64_t>(i)));
    out.push_back(deployment_spec(config, ratio, scope, rng));
  }
  return out;
}

SweepResult run(const ModelConfig& config, const std::vector<LabeledModel>& models, const std::vector<Ratio>& ratios,
                int n_subnets, Scope scope, const SweepData& data, std::uint64_t seed, bool ppl) {
  check_data(data);
  if (n_subnets < 1) throw Error(Errc::invalid_input, "n_subnets must be >= 1");
  SweepResult res;
  res.metric = ppl ? "ppl" : "loss";
  for (const auto& m : models) {
    if (!m.params) throw Error(Errc::invalid_input, "model '" + m.label + "' has no parameters");
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
      std::vector<double> values;
      for (const auto& spec : draw_specs(config, ratios[ri], n_subnets, scope, seed, ri)) {
        const auto e = evaluate(config, *m.params, *data.tokens, data.seq_len, data.batch_size, &spec, data.max_batches);
        values.push_back(ppl ? e.perplexity : e.loss);
      }
      SweepCell c = summarize(std::move(values));
      c.model = m.label;
      c.train_ratio = m.train_ratio;
      c.eval_ratio = ratios[ri];
      c.scope = scope;
      res.cells.push_back(std::move(c));
    }
  }
  return res;
}

}  // namespace

const SweepCell& SweepResult::cell(const std::string& model, Ratio eval) const {
  for (const auto& c : cells)
    if (c.model == model && same_ratio(c.eval_ratio, eval)) return c;
  throw Error(Errc::invalid_input, "no sweep cell for " + model + " at " + eval.str());
}

const SweepCell& SweepResult::cell(Ratio train, Ratio eval) const {
  for (const auto& c : cells)
    if (same_ratio(c.train_ratio, train) && same_ratio(c.eval_ratio, eval)) return c;
  throw Error(Errc::invalid_input, "no sweep cell for train " + train.str() + " eval " + eval.str());
}

SweepResult stability_sweep(const ModelConfig& config, const std::vector<LabeledModel>& models,
                            const std::vector<Ratio>& ratios, int n_subnets, Scope scope, const SweepData& data,
                            std::uint64_t seed) {
  return run(config, models, ratios, n_subnets, scope, data, seed, false);
}

SweepResult robustness_grid(const ModelConfig& config, const std::vector<LabeledModel>& models,
                            const std::vector<Ratio>& eval_ratios, int n_subnets, Scope scope, const SweepData& data,
                            std::uint64_t seed) {
  return run(config, models, eval_ratios, n_subnets, scope, data, seed, true);
}

MismatchSummary mismatch_degradation(const SweepResult& grid) {
  MismatchSummary s;
  for (const auto& c : grid.cells) {
    const double tv = c.train_ratio.value(), ev = c.eval_ratio.value();
    if (same_ratio(c.train_ratio, c.eval_ratio)) continue;
    const double d = c.mean - grid.cell(c.train_ratio, c.train_ratio).mean;
    if (tv > ev) {
      s.downward += d;
      ++s.n_downward;
    } else {
      s.upward += d;
      ++s.n_upward;
    }
  }
  if (s.n_downward) s.downward /= s.n_downward;
  if (s.n_upward) s.upward /= s.n_upward;
  return s;
}

BlockScores fisher_block_scores(const ModelConfig& config, const ParameterStore& params, const SweepData& data) {
  check_data(data);
  const auto starts = window_starts(data.tokens->size(), data.seq_len);
  if (starts.empty()) throw Error(Errc::invalid_input, "Fisher pass over an empty split");
  BlockScores s;
  s.attn.assign(static_cast<std::size_t>(config.n_layers), std::vector<double>(static_cast<std::size_t>(config.n_heads), 0.0));
  s.ffn.assign(static_cast<std::size_t>(config.n_layers), std::vector<double>(static_cast<std::size_t>(config.ffn_blocks), 0.0));
  ParameterStore work = params;
  int batches = 0;
  for (std::size_t i = 0; i < starts.size(); i += static_cast<std::size_t>(data.batch_size)) {
    if (data.max_batches > 0 && batches >= data.max_batches) break;
    const std::vector<std::int64_t> chunk(
        starts.begin() + static_cast<std::ptrdiff_t>(i),
        starts.begin() + static_cast<std::ptrdiff_t>(std::min(starts.size(), i + static_cast<std::size_t>(data.batch_size))));
    loss_and_grad(config, work, make_batch(*data.tokens, chunk, data.seq_len));
    auto score = [&](const std::vector<Slice>& slices) {
      double acc = 0.0;
      for (const auto& sl : slices) {
        const Tensor& t = work.at(sl.name);
        for_each_slice_index(t, sl, [&](std::int64_t idx, std::int64_t) {
          const double g = t.grad()[static_cast<std::size_t>(idx)];
          acc += g * g;
        });
      }
      return acc;
    };
    for (int l = 0; l < config.n_layers; ++l) {
      const auto L = static_cast<std::size_t>(l);
      for (int h = 0; h < config.n_heads; ++h) s.attn[L][static_cast<std::size_t>(h)] += score(attn_block_slices(config, l, h));
      for (int r = 0; r < config.ffn_blocks; ++r) s.ffn[L][static_cast<std::size_t>(r)] += score(ffn_block_slices(config, l, r));
    }
    ++batches;
  }
  return s;
}

SubnetSpec prune_by_scores(const ModelConfig& config, const BlockScores& scores, Ratio ratio, Scope scope) {
  SubnetSpec spec = SubnetSpec::full(config);
  spec.scope = scope;
  auto top = [](const std::vector<double>& sc, int k) {
    std::vector<int> idx(sc.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return sc[static_cast<std::size_t>(a)] > sc[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  for (int l : config.partitioned_layers()) {
    const auto L = static_cast<std::size_t>(l);
    if (scope_has_attn(scope)) spec.attn_blocks[L] = top(scores.attn.at(L), ratio.kept(config.n_heads));
    if (scope_has_ffn(scope)) spec.ffn_blocks[L] = top(scores.ffn.at(L), ratio.kept(config.ffn_blocks));
  }
  spec.validate(config);
  return spec;
}

SubnetSpec fisher_block_prune(const ModelConfig& config, const ParameterStore& params, const SweepData& data,
                              Ratio ratio, Scope scope) {
  ratio.kept(config.n_heads);
  ratio.kept(config.ffn_blocks);
  return prune_by_scores(config, fisher_block_scores(config, params, data), ratio, scope);
}

}  // namespace twist
