// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "twist/blueprint.hpp"
#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/orchestrator.hpp"
#include "twist/sweep.hpp"

using namespace twist;
using namespace twist::testing;

namespace {

std::vector<std::int32_t> random_tokens(int vocab, std::size_t n, std::uint64_t seed) {
  Rng r(seed, 0);
  std::vector<std::int32_t> t(n);
  for (auto& v : t) v = static_cast<std::int32_t>(r.uniform_int(vocab));
  return t;
}

}  // namespace

TEST_CASE("stability sweep evaluates the same subnets for every model") {
  const ModelConfig c = tiny_config();
  Rng a(1, 0), b(2, 0);
  const auto pa = init_params(c, a), pb = init_params(c, b);
  const auto toks = random_tokens(c.vocab, 200, 3);
  const SweepData data{&toks, 8, 4, 0};
  const std::vector<Ratio> ratios{{2, 4}, {4, 4}};
  const auto res = stability_sweep(c, {{"a", Ratio{1, 1}, &pa}, {"a2", Ratio{1, 1}, &pa}, {"b", Ratio{1, 1}, &pb}},
                                   ratios, 5, Scope::both, data, 9);
  CHECK(res.metric == "loss");
  CHECK(res.cells.size() == 6);
  const auto& x = res.cell("a", Ratio{2, 4});
  const auto& y = res.cell("a2", Ratio{2, 4});
  CHECK(x.values == y.values);
  CHECK(x.n == 5);

  // Oracle: redraw the subnets from the documented stream and evaluate.
  std::vector<double> want;
  for (int i = 0; i < 5; ++i) {
    Rng rng(9, stream_id("deploy", 0, static_cast<std::uint64_t>(i)));
    const auto spec = deployment_spec(c, Ratio{2, 4}, Scope::both, rng);
    want.push_back(evaluate(c, pa, toks, 8, 4, &spec).loss);
  }
  CHECK(x.values == want);
  double mean = 0.0, var = 0.0;
  for (double v : want) mean += v / 5;
  for (double v : want) var += (v - mean) * (v - mean) / 4;
  CHECK(x.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(x.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  CHECK(x.min == *std::min_element(want.begin(), want.end()));

  // Every draw of the full ratio is the full model.
  const auto& full = res.cell("b", Ratio{4, 4});
  CHECK(full.stddev == 0.0);
  CHECK(full.mean == evaluate(c, pb, toks, 8, 4).loss);
  CHECK_THROWS_AS(res.cell("zzz", Ratio{2, 4}), Error);
}

TEST_CASE("robustness grid reports perplexity per train and eval ratio") {
  const ModelConfig c = tiny_config();
  Rng a(1, 0);
  const auto p = init_params(c, a);
  const auto toks = random_tokens(c.vocab, 200, 4);
  const SweepData data{&toks, 8, 4, 2};
  const auto res = robustness_grid(c, {{"2/4", Ratio{2, 4}, &p}, {"4/4", Ratio{4, 4}, &p}}, {{2, 4}, {4, 4}}, 3,
                                   Scope::both, data, 1);
  CHECK(res.metric == "ppl");
  CHECK(res.cells.size() == 4);
  const auto& cell = res.cell(Ratio{4, 4}, Ratio{4, 4});
  CHECK(cell.mean == doctest::Approx(evaluate(c, p, toks, 8, 4, nullptr, 2).perplexity).epsilon(1e-12));
}

TEST_CASE("mismatch degradation splits cells by direction") {
  SweepResult g;
  g.metric = "ppl";
  const Ratio r4{4, 8}, r6{6, 8}, r8{8, 8};
  const double m[3][3] = {{10, 9, 8.5}, {14, 8, 7.5}, {20, 12, 7}};  // [train][eval]
  const Ratio rs[3] = {r4, r6, r8};
  for (int t = 0; t < 3; ++t)
    for (int e = 0; e < 3; ++e) {
      SweepCell c;
      c.train_ratio = rs[t];
      c.eval_ratio = rs[e];
      c.mean = m[t][e];
      g.cells.push_back(c);
    }
  const auto s = mismatch_degradation(g);
  CHECK(s.n_downward == 3);
  CHECK(s.n_upward == 3);
  CHECK(s.downward == doctest::Approx(((14 - 8) + (20 - 7) + (12 - 7)) / 3.0));
  CHECK(s.upward == doctest::Approx(((9 - 10) + (8.5 - 10) + (7.5 - 8)) / 3.0));
}

TEST_CASE("fisher scores find planted heads and chunks") {
  ModelConfig c = tiny_config();
  Rng init(5, 0);
  auto p = init_params(c, init);
  // Silence every head except 1 and 3, and every chunk except 0, in layer 1.
  const std::set<int> live_heads{1, 3}, live_chunks{0};
  for (int h = 0; h < c.n_heads; ++h)
    if (!live_heads.count(h))
      for (const auto& s : attn_block_slices(c, 1, h))
        if (s.name.find("wv") != std::string::npos || s.name.find("wo") != std::string::npos)
          for_each_slice_index(p.at(s.name), s, [&](std::int64_t i, std::int64_t) { p.at(s.name)[i] = 0.0f; });
  for (int r = 0; r < c.ffn_blocks; ++r)
    if (!live_chunks.count(r))
      for (const auto& s : ffn_block_slices(c, 1, r))
        if (s.name.find("w_in") != std::string::npos || s.name.find("w_out") != std::string::npos)
          for_each_slice_index(p.at(s.name), s, [&](std::int64_t i, std::int64_t) { p.at(s.name)[i] = 0.0f; });
  const auto toks = random_tokens(c.vocab, 300, 6);
  const SweepData data{&toks, 8, 4, 0};
  const auto sc = fisher_block_scores(c, p, data);
  for (int h = 0; h < c.n_heads; ++h) CHECK((sc.attn[1][static_cast<std::size_t>(h)] > 0.0) == (live_heads.count(h) == 1));
  for (int r = 0; r < c.ffn_blocks; ++r) CHECK((sc.ffn[1][static_cast<std::size_t>(r)] > 0.0) == (live_chunks.count(r) == 1));

  const auto spec = fisher_block_prune(c, p, data, Ratio{2, 4}, Scope::both);
  CHECK(spec.attn_blocks[1] == std::vector<int>{1, 3});
  CHECK(std::find(spec.ffn_blocks[1].begin(), spec.ffn_blocks[1].end(), 0) != spec.ffn_blocks[1].end());
  CHECK(spec.attn_blocks[0].size() == 4);  // shared layer untouched
}

TEST_CASE("pruning ties go to the lower block index") {
  const ModelConfig c = tiny_config();
  BlockScores s;
  s.attn.assign(3, {1.0, 2.0, 2.0, 2.0});
  s.ffn.assign(3, {0.0, 0.0, 0.0, 0.0});
  const auto spec = prune_by_scores(c, s, Ratio{2, 4}, Scope::attn);
  CHECK(spec.attn_blocks[2] == std::vector<int>{1, 2});
  CHECK(spec.ffn_blocks[2].size() == 4);
  const auto both = prune_by_scores(c, s, Ratio{1, 4}, Scope::both);
  CHECK(both.ffn_blocks[1] == std::vector<int>{0});
}
