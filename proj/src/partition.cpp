// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/partition.hpp"

#include "twist/errors.hpp"
#include "twist/model.hpp"

namespace twist {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::masked: return "masked";
    case Variant::physical: return "physical";
    case Variant::hybrid: return "hybrid";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "masked") return Variant::masked;
  if (s == "physical" || s == "true") return Variant::physical;
  if (s == "hybrid") return Variant::hybrid;
  throw Error(Errc::invalid_input, "unknown variant '" + s + "' (masked|physical|hybrid)");
}

Mask Mask::all_ones(const ModelConfig& config) {
  Mask m;
  m.head.assign(static_cast<std::size_t>(config.n_layers), std::vector<float>(static_cast<std::size_t>(config.n_heads), 1.0f));
  m.ffn.assign(static_cast<std::size_t>(config.n_layers), std::vector<float>(static_cast<std::size_t>(config.d_inner), 1.0f));
  return m;
}

Mask mask_from_spec(const SubnetSpec& spec, const ModelConfig& config) {
  spec.validate(config);
  Mask m;
  const int bw = config.ffn_block_width();
  for (int l = 0; l < config.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    std::vector<float> head(static_cast<std::size_t>(config.n_heads), 0.0f);
    for (int h : spec.attn_blocks[L]) head[static_cast<std::size_t>(h)] = 1.0f;
    std::vector<float> ffn(static_cast<std::size_t>(config.d_inner), 0.0f);
    for (int r : spec.ffn_blocks[L])
      for (int j = r * bw; j < (r + 1) * bw; ++j) ffn[static_cast<std::size_t>(j)] = 1.0f;
    m.head.push_back(std::move(head));
    m.ffn.push_back(std::move(ffn));
  }
  return m;
}

SubnetSpec spec_from_blueprint(const BlueprintSet& bps, int worker, const ModelConfig& config, SubnetMode mode,
                               Scope scope, bool scale_correction) {
  if (static_cast<int>(bps.size()) != config.n_layers)
    throw Error(Errc::invalid_spec, "blueprint set covers " + std::to_string(bps.size()) + " layers, model has " +
                                        std::to_string(config.n_layers));
  SubnetSpec spec = SubnetSpec::full(config, mode);
  spec.scope = scope;
  spec.scale_correction = scale_correction;
  auto take = [&](const std::optional<Blueprint>& bp, int n_full, int layer, std::vector<int>& dst, bool allowed) {
    if (!bp) return;
    if (!allowed || config.is_shared(layer))
      throw Error(Errc::invalid_spec, "blueprint present for layer " + std::to_string(layer) + " outside the scope");
    if (bp->n_full != n_full)
      throw Error(Errc::invalid_spec, "blueprint of layer " + std::to_string(layer) + " has N_full=" +
                                          std::to_string(bp->n_full) + ", model has " + std::to_string(n_full));
    if (worker < 0 || worker >= bp->workers())
      throw Error(Errc::invalid_worker, "worker " + std::to_string(worker) + " outside blueprint of " +
                                            std::to_string(bp->workers()) + " rows");
    dst = bp->assignments[static_cast<std::size_t>(worker)];
  };
  for (int l = 0; l < config.n_layers; ++l) {
    const auto L = static_cast<std::size_t>(l);
    take(bps[L].attn, config.n_heads, l, spec.attn_blocks[L], scope_has_attn(scope));
    take(bps[L].ffn, config.ffn_blocks, l, spec.ffn_blocks[L], scope_has_ffn(scope));
  }
  spec.validate(config);
  return spec;
}

Mask masks_from_blueprint(const BlueprintSet& bps, int worker, const ModelConfig& config) {
  if (worker < 0) throw Error(Errc::invalid_worker, "negative worker index");
  return mask_from_spec(spec_from_blueprint(bps, worker, config, SubnetMode::masked, Scope::both, true), config);
}

int ScatterManifest::blocks_attn() const {
  int n = 0;
  for (const auto& l : attn_blocks) n += static_cast<int>(l.size());
  return n;
}

int ScatterManifest::blocks_ffn() const {
  int n = 0;
  for (const auto& l : ffn_blocks) n += static_cast<int>(l.size());
  return n;
}

ParameterStore WorkerPayload::working_copy() const {
  if (masked()) {
    if (!central) throw Error(Errc::invalid_spec, "masked payload without a central reference");
    return *central;
  }
  return store;
}

ScatterResult scatter(const ModelConfig& config, std::shared_ptr<const ParameterStore> central,
                      const BlueprintSet& bps, int workers, Variant variant, Scope scope, bool scale_correction) {
  if (!central) throw Error(Errc::invalid_spec, "scatter without a central model");
  if (workers < 1) throw Error(Errc::invalid_worker, "worker count must be >= 1");
  for (const auto& lb : bps)
    for (const auto* bp : {&lb.attn, &lb.ffn})
      if (*bp && (*bp)->workers() != workers)
        throw Error(Errc::invalid_spec, "blueprint rows differ from the worker count");
  ScatterResult out;
  for (int s = 0; s < workers; ++s) {
    const bool masked = variant == Variant::masked || (variant == Variant::hybrid && s == 0);
    WorkerPayload p;
    p.worker = s;
    p.spec = spec_from_blueprint(bps, s, config, masked ? SubnetMode::masked : SubnetMode::physical, scope,
                                 scale_correction);
    if (masked) {
      p.mask = mask_from_spec(p.spec, config);
      p.central = central;
    } else {
      p.store = extract_physical_subnet(config, *central, p.spec);
    }
    ScatterManifest m;
    m.worker = s;
    m.attn_blocks = p.spec.attn_blocks;
    m.ffn_blocks = p.spec.ffn_blocks;
    m.bytes_out = 4 * subnet_param_count(config, p.spec);
    out.manifests.push_back(std::move(m));
    out.payloads.push_back(std::move(p));
  }
  return out;
}

std::vector<UpdateSet> gather(const ModelConfig& config, const std::vector<WorkerResult>& results,
                              std::vector<ScatterManifest>& manifests) {
  std::vector<UpdateSet> out;
  for (auto& m : manifests) {
    const WorkerResult* r = nullptr;
    for (const auto& cand : results)
      if (cand.worker == m.worker) r = &cand;
    if (!r) throw Error(Errc::incomplete_round, "worker " + std::to_string(m.worker) + " did not report");
    UpdateSet u;
    u.worker = m.worker;
    std::int64_t scalars = 0;
    for (const auto& map : subnet_slice_mapping(config, r->spec)) {
      auto values = read_slice(r->store.at(map.local.name), map.local);
      scalars += static_cast<std::int64_t>(values.size());
      u.slices.push_back({map.central, std::move(values)});
    }
    m.bytes_in = 4 * scalars;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace twist
