// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <vector>

#include "twist/blueprint.hpp"
#include "twist/config.hpp"
#include "twist/parameter_store.hpp"

namespace twist {

struct SliceUpdate {
  Slice slice;
  std::vector<float> values;  // row-major over the slice
};

struct UpdateSet {
  int worker = 0;
  std::vector<SliceUpdate> slices;
};

/// Each scalar becomes the mean of the values reported by the workers that
/// held it (a plain copy when exactly one did). Sums run in double, so the
/// result does not depend on worker order. Throws Errc::coverage if some
/// scalar was held by nobody and Errc::corruption on out-of-range slices or
/// value counts that disagree with the slice extent.
ParameterStore aggregate(const ParameterStore& central, std::span<const UpdateSet> updates);

/// Holder multiplicity of every (tensor, block slice) for one round.
std::map<Slice, int> coverage_census(const BlueprintSet& bps, const ModelConfig& config, int workers);

}  // namespace twist
