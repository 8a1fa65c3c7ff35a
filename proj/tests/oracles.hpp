// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force aggregation: every scalar of every worker store is mapped back
// to central coordinates with index arithmetic on the tensor layout, then
// averaged over the workers that held it.
#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "twist/parameter_store.hpp"
#include "twist/partition.hpp"

namespace twist::testing {

// Head or FFN chunk owning scalar i of a per-layer tensor, -1 if shared.
inline int block_owner(const ModelConfig& c, const std::string& name, const Tensor& t, std::int64_t i, bool& is_attn) {
  const std::string leaf = name.substr(name.find('.', 7) + 1);
  const std::int64_t cols = t.rank() == 1 ? 1 : t.dim(1);
  const std::int64_t r = i / cols, col = i % cols;
  is_attn = leaf.rfind("attn.", 0) == 0;
  if (leaf == "attn.wq" || leaf == "attn.wk" || leaf == "attn.wv") return static_cast<int>(col / c.d_head);
  if (leaf == "attn.bq" || leaf == "attn.bk" || leaf == "attn.bv" || leaf == "attn.wo")
    return static_cast<int>(r / c.d_head);
  const int bw = c.ffn_block_width();
  if (leaf == "ffn.w_in") return static_cast<int>(col / bw);
  if (leaf == "ffn.b_in" || leaf == "ffn.w_out") return static_cast<int>(r / bw);
  return -1;
}

inline ParameterStore oracle_aggregate(const ModelConfig& c, const ParameterStore& central,
                                       const std::vector<WorkerResult>& results) {
  ParameterStore out;
  for (const auto& [name, t] : central) {
    const int layer = name.rfind("layers.", 0) == 0 ? std::stoi(name.substr(7)) : -1;
    const std::int64_t cols = t.rank() == 1 ? 1 : t.dim(1);
    Tensor merged(t.shape());
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      double sum = 0.0;
      int count = 0;
      bool is_attn = false;
      const int blk = layer < 0 ? -1 : block_owner(c, name, t, i, is_attn);
      for (const auto& r : results) {
        std::int64_t li = i;
        if (blk >= 0) {
          const auto& kept = is_attn ? r.spec.attn_blocks[static_cast<std::size_t>(layer)]
                                     : r.spec.ffn_blocks[static_cast<std::size_t>(layer)];
          const auto it = std::find(kept.begin(), kept.end(), blk);
          if (it == kept.end()) continue;
          if (r.spec.mode == SubnetMode::physical) {
            const std::int64_t pos = it - kept.begin();
            const std::int64_t bw = is_attn ? c.d_head : c.ffn_block_width();
            const Tensor& lt = r.store.at(name);
            const std::int64_t row = i / cols, col = i % cols;
            const std::int64_t lcols = lt.rank() == 1 ? 1 : lt.dim(1);
            if (t.rank() == 2 && lcols != cols)
              li = row * lcols + pos * bw + (col - blk * bw);
            else
              li = (pos * bw + (row - blk * bw)) * cols + col;
          }
        }
        sum += r.store.at(name)[li];
        ++count;
      }
      if (count == 0) throw std::logic_error("oracle: uncovered scalar in " + name);
      merged[i] = static_cast<float>(sum / count);
    }
    out.insert(name, std::move(merged));
  }
  return out;
}

}  // namespace twist::testing
