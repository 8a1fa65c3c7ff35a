// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <numeric>
#include <thread>

#include "twist/aggregate.hpp"
#include "twist/blueprint.hpp"
#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/optim.hpp"
#include "twist/rng.hpp"

namespace twist {

const char* backend_name(Backend b) { return b == Backend::twist ? "twist" : "data_parallel"; }

Backend parse_backend(const std::string& s) {
  if (s == "twist") return Backend::twist;
  if (s == "data_parallel" || s == "data-parallel" || s == "dp") return Backend::data_parallel;
  throw Error(Errc::invalid_input, "unknown backend '" + s + "' (twist|data_parallel)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_input, msg); };
  if (workers < 1) fail("workers must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (seq_len < 1) fail("seq_len must be >= 1");
  if (!(lr > 0.0f) || !std::isfinite(lr)) fail("lr must be a positive finite number");
  if (repartition_interval < 1) fail("repartition_interval must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (eval_every_rounds < 0 || eval_batches < 0) fail("eval cadence must be non-negative");
  if (train_ratio.num <= 0 || train_ratio.den <= 0 || train_ratio.num > train_ratio.den)
    throw Error(Errc::invalid_ratio, "train ratio " + train_ratio.str() + " must lie in (0, 1]");
}

namespace {

using Clock = std::chrono::steady_clock;
using Batches = std::vector<std::vector<std::int64_t>>;  // batch -> window starts

template <class F>
void run_workers(int n, int threads, F&& f) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto body = [&](int s) {
    try {
      f(s);
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  };
  if (threads <= 1 || n == 1) {
    for (int s = 0; s < n; ++s) body(s);
  } else {
    const int t_count = std::min(threads, n);
    std::vector<std::jthread> pool;
    for (int t = 0; t < t_count; ++t)
      pool.emplace_back([&, t] {
        for (int s = t; s < n; s += t_count) body(s);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Windows of the train split, permuted per epoch and cut into contiguous
// equal shards, one per worker, each split into whole batches.
std::vector<Batches> epoch_shards(const TrainConfig& cfg, std::size_t n_tokens, int epoch) {
  auto starts = window_starts(n_tokens, cfg.seq_len);
  std::vector<int> order(starts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed, stream_id("epoch", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  const std::size_t per = starts.size() / static_cast<std::size_t>(cfg.workers);
  const std::size_t n_batches = per / static_cast<std::size_t>(cfg.batch_size);
  if (n_batches == 0)
    throw Error(Errc::invalid_input, "train split of " + std::to_string(n_tokens) + " tokens gives no full batch of " +
                                         std::to_string(cfg.batch_size) + "x" + std::to_string(cfg.seq_len) +
                                         " per worker for " + std::to_string(cfg.workers) + " workers");
  std::vector<Batches> shards(static_cast<std::size_t>(cfg.workers));
  for (std::size_t s = 0; s < shards.size(); ++s) {
    for (std::size_t b = 0; b < n_batches; ++b) {
      std::vector<std::int64_t> batch;
      for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.batch_size); ++i)
        batch.push_back(starts[static_cast<std::size_t>(order[s * per + b * static_cast<std::size_t>(cfg.batch_size) + i])]);
      shards[s].push_back(std::move(batch));
    }
  }
  return shards;
}

void check_setup(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus) {
  cfg.validate();
  model.validate();
  if (corpus.vocab_size() > model.vocab)
    throw Error(Errc::invalid_input, "corpus vocabulary " + std::to_string(corpus.vocab_size()) +
                                         " exceeds model vocab " + std::to_string(model.vocab));
  if (cfg.seq_len > model.context)
    throw Error(Errc::invalid_input, "seq_len " + std::to_string(cfg.seq_len) + " exceeds context " +
                                         std::to_string(model.context));
}

ParameterStore initial_params(const TrainConfig& cfg, const ModelConfig& model, std::optional<ParameterStore> initial) {
  if (initial) return std::move(*initial);
  Rng rng(cfg.seed, stream_id("init"));
  return init_params(model, rng);
}

bool can_eval(const TrainConfig& cfg, const Corpus& corpus) {
  return !window_starts(corpus.valid.size(), cfg.seq_len).empty();
}

void maybe_eval(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus, const ParameterStore& p,
                int completed, bool force, RunRecord& rec) {
  if (!can_eval(cfg, corpus)) return;
  const bool due = force || (cfg.eval_every_rounds > 0 && completed % cfg.eval_every_rounds == 0);
  if (!due || (!rec.evals.empty() && rec.evals.back().round == completed)) return;
  const auto r = evaluate(model, p, corpus.valid, cfg.seq_len, cfg.batch_size, nullptr, cfg.eval_batches);
  rec.evals.push_back({completed, r.loss});
}

double step_loss(const ModelConfig& model, ParameterStore& store, const TokenBatch& batch, const SubnetSpec* spec,
                 int round, int worker, int step) {
  try {
    return loss_and_grad(model, store, batch, spec);
  } catch (const Error& e) {
    if (e.code() != Errc::numeric) throw;
    throw Error(Errc::numeric, "round " + std::to_string(round) + " worker " + std::to_string(worker) + " batch " +
                                   std::to_string(step) + ": non-finite loss");
  }
}

// keep[name][i] = 1 for scalars inside the worker's kept blocks.
std::map<std::string, std::vector<char>> keep_masks(const ModelConfig& model, const SubnetSpec& spec,
                                                    const ParameterStore& store) {
  std::map<std::string, std::vector<char>> out;
  const auto full = SubnetSpec::full(model);
  for (int l = 0; l < model.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    if (spec.attn_blocks[L].size() != full.attn_blocks[L].size())
      for (const auto& n : attn_block_param_names(l)) out[n].assign(static_cast<std::size_t>(store.at(n).numel()), 0);
    if (spec.ffn_blocks[L].size() != full.ffn_blocks[L].size())
      for (const auto& n : ffn_block_param_names(l)) out[n].assign(static_cast<std::size_t>(store.at(n).numel()), 0);
  }
  for (const auto& m : subnet_slice_mapping(model, spec)) {
    auto it = out.find(m.central.name);
    if (it == out.end()) continue;
    for_each_slice_index(store.at(m.central.name), m.central,
                         [&](std::int64_t i, std::int64_t) { it->second[static_cast<std::size_t>(i)] = 1; });
  }
  return out;
}

void zero_masked_grads(ParameterStore& store, const std::map<std::string, std::vector<char>>& keep) {
  for (const auto& [name, k] : keep) {
    auto g = store.at(name).grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!k[i]) g[i] = 0.0f;
  }
}

}  // namespace

TrainResult train_twist(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus,
                        std::optional<ParameterStore> initial) {
  check_setup(cfg, model, corpus);
  const auto t0 = Clock::now();
  TrainResult res;
  RunRecord& rec = res.record;
  ParameterStore central = initial_params(cfg, model, std::move(initial));
  maybe_eval(cfg, model, corpus, central, 0, true, rec);
  const AdamOptions opts{cfg.lr};
  const int S = cfg.workers;
  std::int64_t cumulative = 0;
  int round = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto shards = epoch_shards(cfg, corpus.train.size(), epoch);
    const int n_batches = static_cast<int>(shards[0].size());
    for (int b0 = 0; b0 < n_batches; b0 += cfg.repartition_interval, ++round) {
      const int b1 = std::min(n_batches, b0 + cfg.repartition_interval);
      Rng bp_rng(cfg.seed, stream_id("bp", static_cast<std::uint64_t>(round)));
      const auto bps = generate_round_blueprints(model, S, cfg.train_ratio, cfg.scope, bp_rng);
      auto shared = std::make_shared<const ParameterStore>(central);
      auto sc = scatter(model, shared, bps, S, cfg.variant, cfg.scope, model.scale_correction);

      std::vector<WorkerResult> results(static_cast<std::size_t>(S));
      std::vector<std::vector<double>> losses(static_cast<std::size_t>(S));
      run_workers(S, cfg.threads, [&](int s) {
        const auto& p = sc.payloads[static_cast<std::size_t>(s)];
        ParameterStore store = p.working_copy();
        std::map<std::string, std::vector<char>> keep;
        if (p.masked()) keep = keep_masks(model, p.spec, store);
        AdamState state;
        for (int b = b0; b < b1; ++b) {
          const auto batch = make_batch(corpus.train, shards[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)], cfg.seq_len);
          const double l = step_loss(model, store, batch, &p.spec, round, s, b);
          if (p.masked()) zero_masked_grads(store, keep);
          adam_step(store, state, opts);
          losses[static_cast<std::size_t>(s)].push_back(l);
        }
        store.clear_grad();
        results[static_cast<std::size_t>(s)] = WorkerResult{s, p.spec, std::move(store)};
      });
      shared.reset();

      const auto updates = gather(model, results, sc.manifests);
      central = aggregate(central, updates);
      if (!central.all_finite())
        throw Error(Errc::numeric, "round " + std::to_string(round) + ": aggregated model is not finite");

      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& wl : losses)
        for (double l : wl) sum += l, ++count;
      rec.round_losses.push_back(sum / static_cast<double>(count));
      std::vector<SubnetSpec> specs;
      for (const auto& m : sc.manifests) {
        cumulative += m.bytes_out + m.bytes_in;
        rec.round_logs.push_back({round, m.worker, m.bytes_out, m.bytes_in, m.blocks_attn(), m.blocks_ffn()});
        rec.peak_worker_param_bytes = std::max(rec.peak_worker_param_bytes, m.bytes_out);
      }
      for (const auto& p : sc.payloads) specs.push_back(p.spec);
      rec.schedule.push_back(std::move(specs));
      rec.cumulative_bytes.push_back(cumulative);
      maybe_eval(cfg, model, corpus, central, round + 1, false, rec);
    }
  }
  maybe_eval(cfg, model, corpus, central, round, true, rec);
  rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  res.params = std::move(central);
  return res;
}

TrainResult train_data_parallel(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus,
                                std::optional<ParameterStore> initial) {
  check_setup(cfg, model, corpus);
  const auto t0 = Clock::now();
  TrainResult res;
  RunRecord& rec = res.record;
  ParameterStore central = initial_params(cfg, model, std::move(initial));
  maybe_eval(cfg, model, corpus, central, 0, true, rec);
  const AdamOptions opts{cfg.lr};
  const int S = cfg.workers;
  const auto full = SubnetSpec::full(model);
  const std::int64_t model_bytes = 4 * subnet_param_count(model, full);
  std::vector<ParameterStore> replicas(static_cast<std::size_t>(S), central);
  AdamState state;
  std::int64_t cumulative = 0;
  int round = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto shards = epoch_shards(cfg, corpus.train.size(), epoch);
    const int n_batches = static_cast<int>(shards[0].size());
    for (int b0 = 0; b0 < n_batches; b0 += cfg.repartition_interval, ++round) {
      const int b1 = std::min(n_batches, b0 + cfg.repartition_interval);
      double sum = 0.0;
      std::size_t count = 0;
      for (int b = b0; b < b1; ++b) {
        std::vector<double> losses(static_cast<std::size_t>(S));
        run_workers(S, cfg.threads, [&](int s) {
          ParameterStore& rep = replicas[static_cast<std::size_t>(s)];
          for (const auto& [name, t] : central) rep.at(name).storage() = t.storage();
          const auto batch = make_batch(corpus.train, shards[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)], cfg.seq_len);
          losses[static_cast<std::size_t>(s)] = step_loss(model, rep, batch, nullptr, round, s, b);
        });
        for (auto& [name, t] : central) {
          auto g = t.ensure_grad();
          std::vector<std::span<const float>> parts;
          for (const auto& rep : replicas) parts.push_back(rep.at(name).grad());
          for (std::size_t i = 0; i < g.size(); ++i) {
            double acc = 0.0;
            for (const auto& part : parts) acc += part[i];
            g[i] = static_cast<float>(acc / S);
          }
        }
        adam_step(central, state, opts);
        for (double l : losses) sum += l, ++count;
      }
      rec.round_losses.push_back(sum / static_cast<double>(count));
      std::vector<SubnetSpec> specs(static_cast<std::size_t>(S), full);
      for (int s = 0; s < S; ++s) {
        cumulative += 2 * model_bytes;
        rec.round_logs.push_back({round, s, model_bytes, model_bytes, model.n_layers * model.n_heads,
                                  model.n_layers * model.ffn_blocks});
      }
      rec.peak_worker_param_bytes = model_bytes;
      rec.schedule.push_back(std::move(specs));
      rec.cumulative_bytes.push_back(cumulative);
      maybe_eval(cfg, model, corpus, central, round + 1, false, rec);
    }
  }
  central.clear_grad();
  maybe_eval(cfg, model, corpus, central, round, true, rec);
  rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  res.params = std::move(central);
  return res;
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const Corpus& corpus) {
  return cfg.backend == Backend::twist ? train_twist(cfg, model, corpus) : train_data_parallel(cfg, model, corpus);
}

EvalResult evaluate(const ModelConfig& config, const ParameterStore& params, const std::vector<std::int32_t>& split,
                    int seq_len, int batch_size, const SubnetSpec* spec, int max_batches) {
  if (batch_size < 1) throw Error(Errc::invalid_input, "batch_size must be >= 1");
  const auto starts = window_starts(split.size(), seq_len);
  if (starts.empty()) throw Error(Errc::invalid_input, "evaluation split is empty (shorter than one window)");
  double total = 0.0;
  std::int64_t tokens = 0;
  int batches = 0;
  for (std::size_t i = 0; i < starts.size(); i += static_cast<std::size_t>(batch_size)) {
    if (max_batches > 0 && batches >= max_batches) break;
    const std::vector<std::int64_t> chunk(starts.begin() + static_cast<std::ptrdiff_t>(i),
                                          starts.begin() + static_cast<std::ptrdiff_t>(std::min(starts.size(), i + static_cast<std::size_t>(batch_size))));
    const auto b = make_batch(split, chunk, seq_len);
    const auto n = static_cast<std::int64_t>(b.targets.size());
    total += loss(config, params, b, spec) * static_cast<double>(n);
    tokens += n;
    ++batches;
  }
  EvalResult r;
  r.loss = total / static_cast<double>(tokens);
  r.perplexity = std::exp(r.loss);
  r.tokens = tokens;
  return r;
}

EvalResult evaluate_workers(const ModelConfig& config, const ParameterStore& params, const std::vector<SubnetSpec>& specs,
                            const std::vector<std::int32_t>& split, int seq_len, int batch_size, int max_batches) {
  if (specs.empty()) throw Error(Errc::invalid_input, "no worker specs to evaluate");
  double sum = 0.0;
  EvalResult r;
  for (const auto& s : specs) {
    const auto e = evaluate(config, params, split, seq_len, batch_size, &s, max_batches);
    sum += e.loss;
    r.tokens = e.tokens;
  }
  r.loss = sum / static_cast<double>(specs.size());
  r.perplexity = std::exp(r.loss);
  return r;
}

}  // namespace twist
