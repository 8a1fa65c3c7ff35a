// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twist/parameter_store.hpp"

namespace twist {

struct AdamOptions {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

struct AdamState {
  std::int64_t step = 0;
  std::map<std::string, std::vector<float>> m;
  std::map<std::string, std::vector<float>> v;

  void reset() {
    step = 0;
    m.clear();
    v.clear();
  }
};

/// One bias-corrected Adam update using each tensor's gradient buffer.
/// Tensors without a gradient are skipped. A non-finite gradient aborts with
/// Errc::numeric naming the parameter, before any tensor is modified.
void adam_step(ParameterStore& params, AdamState& state, const AdamOptions& options);

}  // namespace twist
