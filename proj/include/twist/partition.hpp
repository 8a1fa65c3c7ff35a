// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twist/aggregate.hpp"
#include "twist/blueprint.hpp"
#include "twist/config.hpp"
#include "twist/parameter_store.hpp"
#include "twist/subnet.hpp"

namespace twist {

enum class Variant { masked, physical, hybrid };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

/// Activation masks for one worker: per layer, a head mask of length H and an
/// FFN mask of length d_inner, entries 0 or 1.
struct Mask {
  std::vector<std::vector<float>> head;
  std::vector<std::vector<float>> ffn;

  static Mask all_ones(const ModelConfig& config);
};

Mask masks_from_blueprint(const BlueprintSet& bps, int worker, const ModelConfig& config);
Mask mask_from_spec(const SubnetSpec& spec, const ModelConfig& config);

SubnetSpec spec_from_blueprint(const BlueprintSet& bps, int worker, const ModelConfig& config,
                               SubnetMode mode, Scope scope, bool scale_correction);

struct ScatterManifest {
  int worker = 0;
  std::vector<std::vector<int>> attn_blocks;
  std::vector<std::vector<int>> ffn_blocks;
  std::int64_t bytes_out = 0;  // central -> worker
  std::int64_t bytes_in = 0;   // worker -> central

  int blocks_attn() const;
  int blocks_ffn() const;
};

/// What one worker receives. Masked workers get the mask and a read-only
/// reference to the central model; physical workers get a sliced copy.
struct WorkerPayload {
  int worker = 0;
  SubnetSpec spec;
  std::optional<Mask> mask;
  std::shared_ptr<const ParameterStore> central;
  ParameterStore store;

  bool masked() const { return spec.mode == SubnetMode::masked; }
  /// The store the worker trains: a private copy of central for masked workers.
  ParameterStore working_copy() const;
};

struct ScatterResult {
  std::vector<WorkerPayload> payloads;
  std::vector<ScatterManifest> manifests;
};

/// Hybrid: worker 0 is the central accelerator training a masked subnet,
/// workers 1..S-1 receive physical slices.
ScatterResult scatter(const ModelConfig& config, std::shared_ptr<const ParameterStore> central,
                      const BlueprintSet& bps, int workers, Variant variant, Scope scope,
                      bool scale_correction);

struct WorkerResult {
  int worker = 0;
  SubnetSpec spec;
  ParameterStore store;
};

/// Collects each worker's kept slices in central coordinates and records the
/// return traffic on the manifests. Throws Errc::incomplete_round if a worker
/// named in the manifests did not report.
std::vector<UpdateSet> gather(const ModelConfig& config, const std::vector<WorkerResult>& results,
                              std::vector<ScatterManifest>& manifests);

}  // namespace twist
