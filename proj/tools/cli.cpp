// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "twist/blueprint.hpp"
#include "twist/checkpoint.hpp"
#include "twist/cost.hpp"
#include "twist/csv.hpp"
#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/sweep.hpp"
#include "twist/verify.hpp"

#ifndef TWIST_VERSION
#define TWIST_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace twist::cli {

// ---------------------------------------------------------------- config I/O

json to_json(const ModelConfig& c) {
  return json{{"n_layers", c.n_layers},
              {"d_model", c.d_model},
              {"n_heads", c.n_heads},
              {"d_head", c.d_head},
              {"d_inner", c.d_inner},
              {"ffn_blocks", c.ffn_blocks},
              {"vocab", c.vocab},
              {"context", c.context},
              {"shared_layers", c.shared_layers},
              {"activation", activation_name(c.activation)},
              {"tie_projection", c.tie_projection},
              {"scale_correction", c.scale_correction}};
}

json to_json(const TrainConfig& c) {
  return json{{"backend", backend_name(c.backend)},
              {"workers", c.workers},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seq_len", c.seq_len},
              {"lr", c.lr},
              {"repartition_interval", c.repartition_interval},
              {"scope", scope_name(c.scope)},
              {"train_ratio", c.train_ratio.str()},
              {"variant", variant_name(c.variant)},
              {"seed", c.seed},
              {"dataset", c.dataset},
              {"tokenizer", c.tokenizer == Tokenizer::chars ? "chars" : "bytes"},
              {"eval_every_rounds", c.eval_every_rounds},
              {"eval_batches", c.eval_batches},
              {"threads", c.threads}};
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw Error(Errc::invalid_input, std::string(what) + " config must be an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw Error(Errc::invalid_input, "unknown " + std::string(what) + " config key '" + k + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

ModelConfig model_from_json(const json& j, ModelConfig c) {
  reject_unknown(j,
                 {"n_layers", "d_model", "n_heads", "d_head", "d_inner", "ffn_blocks", "vocab", "context",
                  "shared_layers", "activation", "tie_projection", "scale_correction"},
                 "model");
  take(j, "n_layers", c.n_layers);
  take(j, "d_model", c.d_model);
  take(j, "n_heads", c.n_heads);
  take(j, "d_head", c.d_head);
  take(j, "d_inner", c.d_inner);
  take(j, "ffn_blocks", c.ffn_blocks);
  take(j, "vocab", c.vocab);
  take(j, "context", c.context);
  take(j, "shared_layers", c.shared_layers);
  std::string act = activation_name(c.activation);
  take(j, "activation", act);
  c.activation = parse_activation(act);
  take(j, "tie_projection", c.tie_projection);
  take(j, "scale_correction", c.scale_correction);
  return c;
}

TrainConfig train_from_json(const json& j, TrainConfig c) {
  reject_unknown(j,
                 {"backend", "workers", "epochs", "batch_size", "seq_len", "lr", "repartition_interval", "scope",
                  "train_ratio", "variant", "seed", "dataset", "tokenizer", "eval_every_rounds", "eval_batches",
                  "threads"},
                 "train");
  std::string s = backend_name(c.backend);
  take(j, "backend", s);
  c.backend = parse_backend(s);
  take(j, "workers", c.workers);
  take(j, "epochs", c.epochs);
  take(j, "batch_size", c.batch_size);
  take(j, "seq_len", c.seq_len);
  take(j, "lr", c.lr);
  take(j, "repartition_interval", c.repartition_interval);
  s = scope_name(c.scope);
  take(j, "scope", s);
  c.scope = parse_scope(s);
  s = c.train_ratio.str();
  take(j, "train_ratio", s);
  c.train_ratio = Ratio::parse(s);
  s = variant_name(c.variant);
  take(j, "variant", s);
  c.variant = parse_variant(s);
  take(j, "seed", c.seed);
  take(j, "dataset", c.dataset);
  s = c.tokenizer == Tokenizer::chars ? "chars" : "bytes";
  take(j, "tokenizer", s);
  c.tokenizer = parse_tokenizer(s);
  take(j, "eval_every_rounds", c.eval_every_rounds);
  take(j, "eval_batches", c.eval_batches);
  take(j, "threads", c.threads);
  return c;
}

namespace {

// ------------------------------------------------------------------ helpers

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string default_out_dir() {
  const char* env = std::getenv("TWIST_OUT_DIR");
  return env && *env ? env : "twist_out";
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io, "config not found: '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  f << text;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(Errc::invalid_input, "cannot parse integer list '" + s + "'");
    }
  }
  return out;
}

std::vector<Ratio> parse_ratio_list(const std::string& s, int default_den) {
  std::vector<Ratio> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(Ratio::parse(item, default_den));
  if (out.empty()) throw Error(Errc::invalid_ratio, "empty ratio list");
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

const std::vector<std::int32_t>& pick_split(const Corpus& c, const std::string& name) {
  if (name == "train") return c.train;
  if (name == "valid") return c.valid;
  if (name == "test") return c.test;
  throw Error(Errc::invalid_input, "unknown split '" + name + "' (train|valid|test)");
}

void check_vocab(const ModelConfig& m, const Corpus& c) {
  if (c.vocab_size() > m.vocab)
    throw Error(Errc::invalid_input, "dataset vocabulary " + std::to_string(c.vocab_size()) +
                                         " does not fit checkpoint vocab " + std::to_string(m.vocab));
}

// Model flags shared by train and cost.
struct ModelFlags {
  std::optional<int> n_layers, d_model, n_heads, d_head, d_inner, ffn_blocks, context;
  std::optional<std::string> shared_layers, activation;
  bool untied = false, no_scale = false;

  void add(CLI::App* app) {
    app->add_option("--layers", n_layers, "decoder layers");
    app->add_option("--d-model", d_model, "embedding width");
    app->add_option("--heads", n_heads, "attention heads per layer");
    app->add_option("--d-head", d_head, "width per head");
    app->add_option("--d-inner", d_inner, "FFN hidden width");
    app->add_option("--ffn-blocks", ffn_blocks, "FFN blocks per layer");
    app->add_option("--context", context, "maximum sequence length");
    app->add_option("--shared-layers", shared_layers, "comma-separated layers never partitioned");
    app->add_option("--activation", activation, "relu|gelu");
    app->add_flag("--untied", untied, "separate output projection");
    app->add_flag("--no-scale-correction", no_scale, "disable subnet activation scaling");
  }

  void apply(ModelConfig& c) const {
    if (n_layers) c.n_layers = *n_layers;
    if (d_model) c.d_model = *d_model;
    if (n_heads) c.n_heads = *n_heads;
    if (d_head) c.d_head = *d_head;
    if (d_inner) c.d_inner = *d_inner;
    if (ffn_blocks) c.ffn_blocks = *ffn_blocks;
    if (context) c.context = *context;
    if (shared_layers) c.shared_layers = parse_int_list(*shared_layers);
    if (activation) c.activation = parse_activation(*activation);
    if (untied) c.tie_projection = false;
    if (no_scale) c.scale_correction = false;
  }
};

// -------------------------------------------------------------------- train

struct TrainFlags {
  std::optional<std::string> config, backend, dataset, tokenizer, scope, ratio, variant, out;
  std::optional<int> workers, epochs, batch_size, seq_len, interval, threads, eval_every, eval_batches;
  std::optional<float> lr;
  std::optional<std::uint64_t> seed;
  ModelFlags model;
};

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  ModelConfig mc;
  TrainConfig tc;
  if (f.config) {
    const json j = read_json_file(*f.config);
    if (!j.is_object()) throw Error(Errc::invalid_input, "config root must be an object");
    if (j.contains("model")) mc = model_from_json(j.at("model"), mc);
    if (j.contains("train")) tc = train_from_json(j.at("train"), tc);
  }
  f.model.apply(mc);
  if (f.backend) tc.backend = parse_backend(*f.backend);
  if (f.dataset) tc.dataset = *f.dataset;
  if (f.tokenizer) tc.tokenizer = parse_tokenizer(*f.tokenizer);
  if (f.scope) tc.scope = parse_scope(*f.scope);
  if (f.ratio) tc.train_ratio = Ratio::parse(*f.ratio, mc.n_heads);
  if (f.variant) tc.variant = parse_variant(*f.variant);
  if (f.workers) tc.workers = *f.workers;
  if (f.epochs) tc.epochs = *f.epochs;
  if (f.batch_size) tc.batch_size = *f.batch_size;
  if (f.seq_len) tc.seq_len = *f.seq_len;
  if (f.interval) tc.repartition_interval = *f.interval;
  if (f.threads) tc.threads = *f.threads;
  if (f.eval_every) tc.eval_every_rounds = *f.eval_every;
  if (f.eval_batches) tc.eval_batches = *f.eval_batches;
  if (f.lr) tc.lr = *f.lr;
  if (f.seed) tc.seed = *f.seed;
  if (tc.dataset.empty()) throw Error(Errc::invalid_input, "no dataset given (--dataset or train.dataset)");
  if (!fs::exists(tc.dataset)) throw Error(Errc::io, "dataset not found: '" + tc.dataset + "'");
  tc.validate();

  const Corpus corpus = load_corpus(tc.dataset, tc.tokenizer);
  mc.vocab = corpus.vocab_size();
  mc.validate();

  const fs::path dir = f.out ? fs::path(*f.out) : fs::path(default_out_dir());
  fs::create_directories(dir);
  const fs::path ckpt = dir / "checkpoint.twst", losses = dir / "losses.csv", rounds = dir / "rounds.csv",
                 evals = dir / "evals.csv", manifest_path = dir / "manifest.json";
  json manifest{{"command", "train"},
                {"tool_version", TWIST_VERSION},
                {"seed", tc.seed},
                {"model", to_json(mc)},
                {"train", to_json(tc)},
                {"artifacts",
                 {{"checkpoint", ckpt.string()},
                  {"losses", losses.string()},
                  {"rounds", rounds.string()},
                  {"evals", evals.string()}}},
                {"started", now_utc()},
                {"status", "running"}};
  write_text(manifest_path, manifest.dump(2) + "\n");

  TrainResult res;
  try {
    res = train(tc, mc, corpus);
  } catch (const Error& e) {
    if (e.code() != Errc::numeric) throw;
    manifest["status"] = "aborted";
    manifest["error"] = e.what();
    manifest["finished"] = now_utc();
    write_text(manifest_path, manifest.dump(2) + "\n");
    err << "training aborted: " << e.what() << "\n";
    return kTrainAbort;
  }
  save_checkpoint(ckpt.string(), Checkpoint{mc, std::nullopt, res.params});

  CsvTable lt{{"round", "loss", "cumulative_bytes"}, {}};
  for (std::size_t r = 0; r < res.record.round_losses.size(); ++r)
    lt.add_row({csv_number(static_cast<long long>(r)), csv_number(res.record.round_losses[r]),
                csv_number(static_cast<long long>(res.record.cumulative_bytes[r]))});
  write_csv(losses.string(), lt);
  CsvTable rt{{"round", "worker", "bytes_out", "bytes_in", "blocks_attn", "blocks_ffn"}, {}};
  for (const auto& l : res.record.round_logs)
    rt.add_row({csv_number(static_cast<long long>(l.round)), csv_number(static_cast<long long>(l.worker)),
                csv_number(static_cast<long long>(l.bytes_out)), csv_number(static_cast<long long>(l.bytes_in)),
                csv_number(static_cast<long long>(l.blocks_attn)), csv_number(static_cast<long long>(l.blocks_ffn))});
  write_csv(rounds.string(), rt);
  CsvTable et{{"round", "loss"}, {}};
  for (const auto& e : res.record.evals)
    et.add_row({csv_number(static_cast<long long>(e.round)), csv_number(e.loss)});
  write_csv(evals.string(), et);

  manifest["status"] = "ok";
  manifest["finished"] = now_utc();
  manifest["summary"] = {{"rounds", res.record.round_losses.size()},
                         {"final_round_loss", res.record.round_losses.empty() ? 0.0 : res.record.round_losses.back()},
                         {"total_bytes", res.record.total_bytes()},
                         {"peak_worker_param_bytes", res.record.peak_worker_param_bytes},
                         {"wall_seconds", res.record.wall_seconds}};
  write_text(manifest_path, manifest.dump(2) + "\n");
  out << "rounds=" << res.record.round_losses.size() << " final_loss="
      << (res.record.round_losses.empty() ? 0.0 : res.record.round_losses.back())
      << " total_bytes=" << res.record.total_bytes() << " checkpoint=" << ckpt.string() << "\n";
  return kOk;
}

// ------------------------------------------------------------ extract / eval

struct SubnetFlags {
  std::optional<std::string> ratio;
  std::string scope = "both";
  std::uint64_t seed = 0;
};

int cmd_extract(const std::string& in, const std::string& outp, const SubnetFlags& sf, std::ostream& out) {
  const Checkpoint parent = load_checkpoint(in);
  if (parent.subnet) throw Error(Errc::invalid_input, "checkpoint '" + in + "' is already an extracted subnet");
  if (!sf.ratio) throw Error(Errc::invalid_input, "extract needs --ratio");
  Rng rng(sf.seed, stream_id("extract"));
  const SubnetSpec spec = deployment_spec(parent.config, Ratio::parse(*sf.ratio, parent.config.n_heads),
                                          parse_scope(sf.scope), rng, SubnetMode::physical);
  Checkpoint child{parent.config, spec, extract_physical_subnet(parent.config, parent.params, spec)};
  save_checkpoint(outp, child);
  const auto full = count_params(parent.config), sub = count_params(parent.config, spec);
  out << "parent_payload_bytes=" << checkpoint_payload_bytes(parent)
      << " subnet_payload_bytes=" << checkpoint_payload_bytes(child)
      << " predicted_saving_bytes=" << 4 * (full.n_total() - sub.n_total()) << " out=" << outp << "\n";
  return kOk;
}

struct EvalFlags {
  std::string checkpoint, dataset, split = "valid", tokenizer = "chars";
  int seq_len = 128, batch_size = 8, max_batches = 0;
  bool json_out = false;
  SubnetFlags subnet;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  if (!fs::exists(f.dataset)) throw Error(Errc::io, "dataset not found: '" + f.dataset + "'");
  const Corpus corpus = load_corpus(f.dataset, parse_tokenizer(f.tokenizer));
  check_vocab(ck.config, corpus);
  std::optional<SubnetSpec> spec = ck.subnet;
  if (f.subnet.ratio) {
    if (spec) throw Error(Errc::invalid_input, "--ratio applies to full checkpoints only");
    Rng rng(f.subnet.seed, stream_id("extract"));
    spec = deployment_spec(ck.config, Ratio::parse(*f.subnet.ratio, ck.config.n_heads), parse_scope(f.subnet.scope), rng,
                           SubnetMode::masked);
  }
  const auto r = evaluate(ck.config, ck.params, pick_split(corpus, f.split), f.seq_len, f.batch_size,
                          spec ? &*spec : nullptr, f.max_batches);
  if (f.json_out)
    out << json{{"loss", r.loss}, {"perplexity", r.perplexity}, {"tokens", r.tokens}}.dump() << "\n";
  else
    out << "loss=" << csv_number(r.loss) << " perplexity=" << csv_number(r.perplexity) << " tokens=" << r.tokens << "\n";
  return kOk;
}

// ------------------------------------------------------------------- verify

struct VerifyFlags {
  int trials = 20000;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  Rng rng(f.seed, stream_id("verify"));
  auto rows = mc_verify_ffn_scaling(256, 1024, {0.25, 0.5, 0.75, 1.0}, f.trials, rng);
  auto attn = mc_verify_attn_scaling(32, 512, 8, 64, {2, 4, 6, 8}, f.trials, rng);
  rows.insert(rows.end(), attn.begin(), attn.end());
  CsvTable t{{"kind", "fraction", "measured", "predicted", "abs_err", "squared_measured", "squared_predicted",
              "component_variance", "variance_predicted", "pass"},
             {}};
  std::vector<std::string> failing;
  const Tolerances tol;
  for (const auto& r : rows) {
    const auto c = check_row(r, tol);
    t.add_row({r.kind, csv_number(r.fraction), csv_number(r.measured), csv_number(r.predicted), csv_number(r.abs_err),
               csv_number(r.squared_measured), csv_number(r.squared_predicted), csv_number(r.component_variance),
               csv_number(r.variance_predicted), c.ok() ? "1" : "0"});
    if (!c.ok()) failing.push_back(r.kind + " fraction=" + csv_number(r.fraction));
  }
  if (f.out) write_csv(*f.out, t);
  out << t.str();
  if (!failing.empty()) {
    err << "verification failed (tolerances: ratio " << tol.ratio_rel << ", squared " << tol.squared_rel
        << ", variance " << tol.variance_rel << " relative):\n";
    for (const auto& s : failing) err << "  " << s << "\n";
    return kVerifyFailed;
  }
  return kOk;
}

// --------------------------------------------------------------------- cost

struct CostFlags {
  std::optional<std::string> preset, config, ratio;
  std::string scope = "both";
  bool curve = false;
  ModelFlags model;
};

int cmd_cost(const CostFlags& f, std::ostream& out) {
  if (f.curve) {
    CsvTable t{{"name", "full_params", "subnet_params", "ratio", "ratio_with_positional"}, {}};
    for (const auto& p : memory_ratio_curve(gpt2_family(), 0.5))
      t.add_row({p.name, csv_number(static_cast<long long>(p.full_params)),
                 csv_number(static_cast<long long>(p.subnet_params)), csv_number(p.ratio),
                 csv_number(p.ratio_with_positional)});
    out << t.str();
    return kOk;
  }
  ModelConfig mc = f.preset ? find_preset(*f.preset).config : ModelConfig{};
  if (f.config) {
    const json j = read_json_file(*f.config);
    if (j.contains("model")) mc = model_from_json(j.at("model"), mc);
  }
  f.model.apply(mc);
  mc.validate();
  CostReport rep = count_params(mc);
  if (f.ratio) {
    const Ratio r = Ratio::parse(*f.ratio, mc.n_heads);
    const Scope sc = parse_scope(f.scope);
    std::vector<double> alpha(static_cast<std::size_t>(mc.n_layers), 1.0), beta = alpha;
    for (int l : mc.partitioned_layers()) {
      if (scope_has_attn(sc)) alpha[static_cast<std::size_t>(l)] = static_cast<double>(r.kept(mc.n_heads)) / mc.n_heads;
      if (scope_has_ffn(sc)) beta[static_cast<std::size_t>(l)] = static_cast<double>(r.kept(mc.ffn_blocks)) / mc.ffn_blocks;
    }
    rep = count_params(mc, alpha, beta);
  }
  CsvTable t{{"name", "count"}, {}};
  for (const auto& [name, n] : rep.rows()) t.add_row({name, csv_number(static_cast<long long>(n))});
  out << t.str();
  return kOk;
}

// -------------------------------------------------------------------- sweep

struct SweepFlags {
  std::string dataset, split = "valid", tokenizer = "chars", scope = "both";
  std::string twist_ckpt, baseline_ckpt, ratios = "4/8,6/8,8/8";
  std::string checkpoints, train_ratios, eval_ratios;
  int n = 20, seq_len = 128, batch_size = 8, max_batches = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

int cmd_sweep_stability(const SweepFlags& f, std::ostream& out) {
  const Checkpoint a = load_checkpoint(f.twist_ckpt);
  const Checkpoint b = load_checkpoint(f.baseline_ckpt);
  if (!(a.config == b.config)) throw Error(Errc::invalid_input, "checkpoints differ in model config");
  if (!fs::exists(f.dataset)) throw Error(Errc::io, "dataset not found: '" + f.dataset + "'");
  const Corpus corpus = load_corpus(f.dataset, parse_tokenizer(f.tokenizer));
  check_vocab(a.config, corpus);
  const SweepData data{&pick_split(corpus, f.split), f.seq_len, f.batch_size, f.max_batches};
  const auto ratios = parse_ratio_list(f.ratios, a.config.n_heads);
  const auto res = stability_sweep(a.config, {{"twist", Ratio{1, 1}, &a.params}, {"baseline", Ratio{1, 1}, &b.params}},
                                   ratios, f.n, parse_scope(f.scope), data, f.seed);
  CsvTable t{{"model", "ratio", "mean", "std", "min", "max", "n"}, {}};
  for (const auto& c : res.cells)
    t.add_row({c.model, c.eval_ratio.str(), csv_number(c.mean), csv_number(c.stddev), csv_number(c.min),
               csv_number(c.max), csv_number(static_cast<long long>(c.n))});
  if (f.out) write_csv(*f.out, t);
  out << t.str();
  return kOk;
}

int cmd_sweep_robustness(const SweepFlags& f, std::ostream& out) {
  const auto paths = split_list(f.checkpoints);
  if (paths.empty()) throw Error(Errc::invalid_input, "robustness sweep needs --checkpoints");
  std::vector<Checkpoint> cks;
  for (const auto& p : paths) cks.push_back(load_checkpoint(p));
  for (const auto& c : cks)
    if (!(c.config == cks.front().config)) throw Error(Errc::invalid_input, "checkpoints differ in model config");
  const ModelConfig& mc = cks.front().config;
  const auto train_r = parse_ratio_list(f.train_ratios, mc.n_heads);
  const auto eval_r = parse_ratio_list(f.eval_ratios, mc.n_heads);
  if (train_r.size() != cks.size())
    throw Error(Errc::invalid_input, "--train-ratios lists " + std::to_string(train_r.size()) + " ratios for " +
                                         std::to_string(cks.size()) + " checkpoints");
  if (!fs::exists(f.dataset)) throw Error(Errc::io, "dataset not found: '" + f.dataset + "'");
  const Corpus corpus = load_corpus(f.dataset, parse_tokenizer(f.tokenizer));
  check_vocab(mc, corpus);
  std::vector<LabeledModel> models;
  for (std::size_t i = 0; i < cks.size(); ++i) models.push_back({train_r[i].str(), train_r[i], &cks[i].params});
  const SweepData data{&pick_split(corpus, f.split), f.seq_len, f.batch_size, f.max_batches};
  const auto res = robustness_grid(mc, models, eval_r, f.n, parse_scope(f.scope), data, f.seed);
  CsvTable t{{"train_k", "eval_k", "mean", "std", "n"}, {}};
  for (const auto& c : res.cells)
    t.add_row({c.train_ratio.str(), c.eval_ratio.str(), csv_number(c.mean), csv_number(c.stddev),
               csv_number(static_cast<long long>(c.n))});
  if (f.out) write_csv(*f.out, t);
  out << t.str();
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------- run

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Independent subnetwork training simulator for GPT-style decoders", "twist"};
  app.set_version_flag("--version", TWIST_VERSION);
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "train a model with the twist or data-parallel backend");
  train->add_option("--config", tf.config, "JSON config (a previous manifest.json works)");
  train->add_option("--backend", tf.backend, "twist|data_parallel");
  train->add_option("--dataset", tf.dataset, "text corpus");
  train->add_option("--tokenizer", tf.tokenizer, "chars|bytes");
  train->add_option("--workers", tf.workers, "simulated workers S");
  train->add_option("--epochs", tf.epochs);
  train->add_option("--batch-size", tf.batch_size);
  train->add_option("--seq-len", tf.seq_len);
  train->add_option("--lr", tf.lr);
  train->add_option("--repartition-interval", tf.interval, "batches per communication round");
  train->add_option("--scope", tf.scope, "attn|ffn|both");
  train->add_option("--ratio", tf.ratio, "blocks kept per partitioned layer, X/Y");
  train->add_option("--variant", tf.variant, "masked|physical|hybrid");
  train->add_option("--seed", tf.seed);
  train->add_option("--threads", tf.threads, "worker threads (results do not depend on it)");
  train->add_option("--eval-every", tf.eval_every, "validation every N rounds");
  train->add_option("--eval-batches", tf.eval_batches, "cap on validation batches");
  train->add_option("--out", tf.out, "output directory (default $TWIST_OUT_DIR or ./twist_out)");
  tf.model.add(train);

  std::string ex_in, ex_out;
  SubnetFlags ex_sub;
  auto* extract = app.add_subcommand("extract", "sample a random subnet and write it as a smaller checkpoint");
  extract->add_option("--checkpoint", ex_in)->required();
  extract->add_option("--out", ex_out)->required();
  extract->add_option("--ratio", ex_sub.ratio, "X/Y");
  extract->add_option("--scope", ex_sub.scope);
  extract->add_option("--seed", ex_sub.seed);

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "loss and perplexity of a checkpoint or of a random subnet of it");
  eval->add_option("--checkpoint", ef.checkpoint)->required();
  eval->add_option("--dataset", ef.dataset)->required();
  eval->add_option("--split", ef.split, "train|valid|test");
  eval->add_option("--tokenizer", ef.tokenizer);
  eval->add_option("--seq-len", ef.seq_len);
  eval->add_option("--batch-size", ef.batch_size);
  eval->add_option("--max-batches", ef.max_batches);
  eval->add_option("--ratio", ef.subnet.ratio, "evaluate a masked random subnet X/Y");
  eval->add_option("--scope", ef.subnet.scope);
  eval->add_option("--seed", ef.subnet.seed);
  eval->add_flag("--json", ef.json_out);

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of the activation scaling laws");
  verify->add_option("--trials", vf.trials);
  verify->add_option("--seed", vf.seed);
  verify->add_option("--out", vf.out, "also write the table to this CSV");

  CostFlags cf;
  auto* cost = app.add_subcommand("cost", "parameter and memory counts");
  cost->add_option("--preset", cf.preset, "gpt2-small|gpt2-medium|gpt2-large|gpt2-xl");
  cost->add_option("--config", cf.config);
  cost->add_option("--ratio", cf.ratio, "subnet ratio X/Y on partitioned layers");
  cost->add_option("--scope", cf.scope);
  cost->add_flag("--curve", cf.curve, "memory ratio of half-width subnets across the GPT-2 family");
  cf.model.add(cost);

  SweepFlags sf;
  auto* sweep = app.add_subcommand("sweep", "subnet stability and robustness sweeps");
  sweep->require_subcommand(1);
  auto add_common = [&](CLI::App* a) {
    a->add_option("--dataset", sf.dataset)->required();
    a->add_option("--split", sf.split);
    a->add_option("--tokenizer", sf.tokenizer);
    a->add_option("--scope", sf.scope);
    a->add_option("--n", sf.n, "subnets per cell");
    a->add_option("--seq-len", sf.seq_len);
    a->add_option("--batch-size", sf.batch_size);
    a->add_option("--max-batches", sf.max_batches);
    a->add_option("--seed", sf.seed);
    a->add_option("--out", sf.out);
  };
  auto* stab = sweep->add_subcommand("stability", "loss distribution of random subnets, twist vs baseline");
  add_common(stab);
  stab->add_option("--twist", sf.twist_ckpt)->required();
  stab->add_option("--baseline", sf.baseline_ckpt)->required();
  stab->add_option("--ratios", sf.ratios);
  auto* rob = sweep->add_subcommand("robustness", "mean perplexity for every train/eval ratio pair");
  add_common(rob);
  rob->add_option("--checkpoints", sf.checkpoints, "comma-separated, one per train ratio")->required();
  rob->add_option("--train-ratios", sf.train_ratios)->required();
  rob->add_option("--eval-ratios", sf.eval_ratios)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(tf, out, err);
    if (*extract) return cmd_extract(ex_in, ex_out, ex_sub, out);
    if (*eval) return cmd_eval(ef, out);
    if (*verify) return cmd_verify(vf, out, err);
    if (*cost) return cmd_cost(cf, out);
    if (*stab) return cmd_sweep_stability(sf, out);
    if (*rob) return cmd_sweep_robustness(sf, out);
  } catch (const Error& e) {
    err << "twist: " << e.what() << "\n";
    return e.code() == Errc::numeric ? kTrainAbort : kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "twist: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace twist::cli
