// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "twist/cost.hpp"
#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/optim.hpp"
#include "twist/orchestrator.hpp"

using namespace twist;
using namespace twist::testing;

namespace {

std::string toy_text(std::size_t n) {
  const char* words[] = {"the cat sat. ", "a dog ran far. ", "we see the sea. ", "it is on. "};
  std::string s;
  std::uint64_t x = 1;
  while (s.size() < n) {
    x = splitmix64(x);
    s += words[x % 4];
  }
  return s.substr(0, n);
}

struct Setup {
  Corpus corpus;
  ModelConfig model;
  TrainConfig train;
};

Setup setup(std::size_t chars = 6000) {
  Setup s;
  s.corpus = build_corpus(toy_text(chars), Tokenizer::chars);
  s.model = tiny_config();
  s.model.n_layers = 4;
  s.model.shared_layers = {0, 3};
  s.model.context = 16;
  s.model.vocab = s.corpus.vocab_size();
  s.train.seq_len = 16;
  s.train.batch_size = 4;
  s.train.workers = 2;
  s.train.repartition_interval = 5;
  s.train.lr = 3e-3f;
  s.train.train_ratio = Ratio{2, 4};
  s.train.seed = 3;
  return s;
}

// The epoch permutation, recomputed from the public RNG contract.
std::vector<std::int64_t> epoch_order(const TrainConfig& cfg, std::size_t n_tokens, int epoch) {
  const auto starts = window_starts(n_tokens, cfg.seq_len);
  std::vector<int> order(starts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed, stream_id("epoch", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  std::vector<std::int64_t> out;
  for (int i : order) out.push_back(starts[static_cast<std::size_t>(i)]);
  return out;
}

// attn.bk has an exactly-zero gradient (softmax ignores a per-query shift),
// so Adam turns its rounding noise into +-lr steps that depend on summation
// order. It cannot change any output; compare everything else.
double worst_diff(const ParameterStore& a, const ParameterStore& b) {
  double worst = 0.0;
  for (const auto& [name, t] : a)
    if (name.find("attn.bk") == std::string::npos) worst = std::max(worst, max_abs_diff(t.data(), b.at(name).data()));
  return worst;
}

}  // namespace

TEST_CASE("one full-width worker is plain Adam with a per-round optimizer reset") {
  auto s = setup();
  s.train.workers = 1;
  s.train.train_ratio = Ratio{1, 1};
  s.train.epochs = 2;
  for (Variant v : {Variant::physical, Variant::masked}) {
    s.train.variant = v;
    const auto res = train_twist(s.train, s.model, s.corpus);

    Rng init(s.train.seed, stream_id("init"));
    ParameterStore p = init_params(s.model, init);
    std::vector<double> round_losses;
    for (int e = 0; e < s.train.epochs; ++e) {
      const auto order = epoch_order(s.train, s.corpus.train.size(), e);
      const int n_batches = static_cast<int>(order.size()) / s.train.batch_size;
      for (int b0 = 0; b0 < n_batches; b0 += s.train.repartition_interval) {
        AdamState st;
        double sum = 0.0;
        int n = 0;
        for (int b = b0; b < std::min(n_batches, b0 + s.train.repartition_interval); ++b) {
          std::vector<std::int64_t> starts(order.begin() + b * s.train.batch_size,
                                           order.begin() + (b + 1) * s.train.batch_size);
          sum += loss_and_grad(s.model, p, make_batch(s.corpus.train, starts, s.train.seq_len));
          adam_step(p, st, AdamOptions{s.train.lr});
          ++n;
        }
        round_losses.push_back(sum / n);
      }
    }
    REQUIRE(res.record.round_losses.size() == round_losses.size());
    for (std::size_t i = 0; i < round_losses.size(); ++i) CHECK(res.record.round_losses[i] == round_losses[i]);
    p.clear_grad();
    CHECK(res.params.identical(p));
  }
}

TEST_CASE("data parallel equals one worker on the concatenated batch") {
  auto s = setup();
  s.train.backend = Backend::data_parallel;
  s.train.workers = 2;
  // Three steps: long runs drift apart by ordinary float reassociation.
  s.corpus.train.resize(24 * 16 + 1);
  const auto res = train_data_parallel(s.train, s.model, s.corpus);

  Rng init(s.train.seed, stream_id("init"));
  ParameterStore p = init_params(s.model, init);
  AdamState st;
  const auto order = epoch_order(s.train, s.corpus.train.size(), 0);
  const std::size_t per = order.size() / 2;
  const int n_batches = static_cast<int>(per) / s.train.batch_size;
  const auto B = static_cast<std::size_t>(s.train.batch_size);
  for (int b = 0; b < n_batches; ++b) {
    std::vector<std::int64_t> starts;
    for (std::size_t w = 0; w < 2; ++w)
      for (std::size_t i = 0; i < B; ++i) starts.push_back(order[w * per + static_cast<std::size_t>(b) * B + i]);
    loss_and_grad(s.model, p, make_batch(s.corpus.train, starts, s.train.seq_len));
    adam_step(p, st, AdamOptions{s.train.lr});
  }
  CHECK(n_batches == 3);
  CHECK(worst_diff(p, res.params) < 1e-5);
}

TEST_CASE("results do not depend on the thread count") {
  auto s = setup();
  s.train.workers = 3;
  for (Backend b : {Backend::twist, Backend::data_parallel})
    for (Variant v : {Variant::masked, Variant::physical, Variant::hybrid}) {
      if (b == Backend::data_parallel && v != Variant::physical) continue;
      s.train.backend = b;
      s.train.variant = v;
      s.train.threads = 1;
      const auto a = train(s.train, s.model, s.corpus);
      s.train.threads = 3;
      const auto c = train(s.train, s.model, s.corpus);
      CHECK(a.params.identical(c.params));
      CHECK(a.record.round_losses == c.record.round_losses);
      CHECK(a.record.cumulative_bytes == c.record.cumulative_bytes);
    }
}

TEST_CASE("masked and physical variants train the same model") {
  auto s = setup();
  s.train.variant = Variant::masked;
  const auto m = train_twist(s.train, s.model, s.corpus);
  s.train.variant = Variant::physical;
  const auto p = train_twist(s.train, s.model, s.corpus);
  CHECK(worst_diff(m.params, p.params) < 1e-4);
  CHECK(m.record.total_bytes() == p.record.total_bytes());
}

TEST_CASE("logged traffic equals the cost model") {
  auto s = setup();
  s.train.workers = 3;
  s.train.epochs = 2;
  const auto tw = train_twist(s.train, s.model, s.corpus);
  CHECK(tw.record.total_bytes() == comm_volume(s.model, tw.record.schedule));
  std::int64_t sum = 0;
  for (const auto& l : tw.record.round_logs) sum += l.bytes_out + l.bytes_in;
  CHECK(sum == tw.record.total_bytes());
  s.train.backend = Backend::data_parallel;
  const auto dp = train_data_parallel(s.train, s.model, s.corpus);
  CHECK(dp.record.total_bytes() == comm_volume(s.model, dp.record.schedule));
  const auto rounds = static_cast<std::int64_t>(dp.record.round_losses.size());
  CHECK(dp.record.total_bytes() == rounds * 3 * 2 * 4 * count_params(s.model).n_total());
  CHECK(tw.record.total_bytes() < dp.record.total_bytes());
}

TEST_CASE("training reduces the loss") {
  auto s = setup(20000);
  s.train.epochs = 3;
  const auto r = train_twist(s.train, s.model, s.corpus);
  REQUIRE(r.record.evals.size() >= 2);
  CHECK(r.record.evals.back().loss < 0.7 * r.record.evals.front().loss);
  CHECK(r.record.round_losses.back() < 0.7 * r.record.round_losses.front());
}

TEST_CASE("evaluation cadence") {
  auto s = setup();
  s.train.eval_every_rounds = 2;
  const auto r = train_twist(s.train, s.model, s.corpus);
  const int rounds = static_cast<int>(r.record.round_losses.size());
  std::vector<int> want{0};
  for (int k = 2; k <= rounds; k += 2) want.push_back(k);
  if (want.back() != rounds) want.push_back(rounds);
  std::vector<int> got;
  for (const auto& e : r.record.evals) got.push_back(e.round);
  CHECK(got == want);
}

TEST_CASE("evaluation is a token-weighted mean") {
  auto s = setup();
  Rng init(1, 0);
  const auto p = init_params(s.model, init);
  const auto& split = s.corpus.train;
  const auto starts = window_starts(split.size(), 16);
  const auto r = evaluate(s.model, p, split, 16, 5, nullptr, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < 10; ++i) total += loss(s.model, p, make_batch(split, {starts[i]}, 16));
  CHECK(r.loss == doctest::Approx(total / 10).epsilon(1e-6));
  CHECK(r.tokens == 160);
  CHECK(r.perplexity == doctest::Approx(std::exp(r.loss)));
  CHECK_THROWS_AS(evaluate(s.model, p, std::vector<std::int32_t>(5, 0), 16, 5), Error);
}

TEST_CASE("bad runs fail with the right error") {
  auto s = setup();
  auto code_of = [&](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io;
  };
  auto t = s.train;
  t.workers = 3;
  t.train_ratio = Ratio{1, 4};
  CHECK(code_of([&] { train_twist(t, s.model, s.corpus); }) == Errc::infeasible);
  t = s.train;
  t.batch_size = 1000;
  CHECK(code_of([&] { train_twist(t, s.model, s.corpus); }) == Errc::invalid_input);
  t = s.train;
  t.lr = -1.0f;
  CHECK(code_of([&] { train_twist(t, s.model, s.corpus); }) == Errc::invalid_input);
  Rng init(1, 0);
  auto p = init_params(s.model, init);
  p.at("tok_emb")[0] = NAN;
  CHECK(code_of([&] { train_twist(s.train, s.model, s.corpus, p); }) == Errc::numeric);
  CHECK(code_of([&] { train_data_parallel(s.train, s.model, s.corpus, p); }) == Errc::numeric);
}
