// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/optim.hpp"

#include <cmath>

#include "twist/errors.hpp"

namespace twist {

void adam_step(ParameterStore& params, AdamState& state, const AdamOptions& options) {
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    for (float g : t.grad())
      if (!std::isfinite(g)) throw Error(Errc::numeric, "non-finite gradient in '" + name + "'");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(static_cast<double>(options.beta1), static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(options.beta2), static_cast<double>(state.step));
  for (auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    auto& m = state.m[name];
    auto& v = state.v[name];
    const auto n = static_cast<std::size_t>(t.numel());
    if (m.size() != n) m.assign(n, 0.0f);
    if (v.size() != n) v.assign(n, 0.0f);
    auto g = t.grad();
    auto w = t.data();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = options.beta1 * m[i] + (1.0f - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0f - options.beta2) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      w[i] -= static_cast<float>(options.lr * mh / (std::sqrt(vh) + options.eps));
    }
  }
}

}  // namespace twist
