// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/aggregate.hpp"

#include "twist/errors.hpp"
#include "twist/model.hpp"
#include "twist/partition.hpp"

namespace twist {

ParameterStore aggregate(const ParameterStore& central, std::span<const UpdateSet> updates) {
  struct Acc {
    std::vector<double> sum;
    std::vector<int> count;
  };
  std::map<std::string, Acc> acc;
  for (const auto& [name, t] : central)
    acc[name] = Acc{std::vector<double>(static_cast<std::size_t>(t.numel()), 0.0),
                    std::vector<int>(static_cast<std::size_t>(t.numel()), 0)};
  for (const auto& u : updates) {
    for (const auto& su : u.slices) {
      auto it = acc.find(su.slice.name);
      if (it == acc.end())
        throw Error(Errc::corruption, "worker " + std::to_string(u.worker) + " reported unknown tensor '" +
                                          su.slice.name + "'");
      const Tensor& t = central.at(su.slice.name);
      const auto expect = slice_numel(t, su.slice);
      if (expect != static_cast<std::int64_t>(su.values.size()))
        throw Error(Errc::corruption, "worker " + std::to_string(u.worker) + " sent " + std::to_string(su.values.size()) +
                                          " values for " + su.slice.str() + " of extent " + std::to_string(expect));
      Acc& a = it->second;
      for_each_slice_index(t, su.slice, [&](std::int64_t i, std::int64_t p) {
        a.sum[static_cast<std::size_t>(i)] += su.values[static_cast<std::size_t>(p)];
        ++a.count[static_cast<std::size_t>(i)];
      });
    }
  }
  ParameterStore out;
  for (const auto& [name, t] : central) {
    const Acc& a = acc.at(name);
    Tensor r(t.shape());
    for (std::size_t i = 0; i < a.sum.size(); ++i) {
      if (a.count[i] == 0) {
        std::string where = name;
        if (t.rank() == 2)
          where += "[" + std::to_string(static_cast<std::int64_t>(i) / t.cols()) + ", " +
                   std::to_string(static_cast<std::int64_t>(i) % t.cols()) + "]";
        else
          where += "[" + std::to_string(i) + "]";
        throw Error(Errc::coverage, "no worker held " + where);
      }
      r[static_cast<std::int64_t>(i)] = static_cast<float>(a.sum[i] / a.count[i]);
    }
    out.insert(name, std::move(r));
  }
  return out;
}

std::map<Slice, int> coverage_census(const BlueprintSet& bps, const ModelConfig& config, int workers) {
  std::map<Slice, int> census;
  for (int s = 0; s < workers; ++s) {
    const auto spec = spec_from_blueprint(bps, s, config, SubnetMode::masked, Scope::both, config.scale_correction);
    for (const auto& m : subnet_slice_mapping(config, spec)) ++census[m.central];
  }
  return census;
}

}  // namespace twist
