// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace twist {

enum class Errc {
  dimension,       // shape mismatch between operands
  invalid_input,   // malformed data handed to an operation
  degenerate,      // input too small to be meaningful (e.g. layer norm over 1 element)
  numeric,         // NaN / Inf encountered
  infeasible,      // blueprint size bound violated
  invalid_spec,    // subnet spec / blueprint inconsistent with the model
  invalid_ratio,   // subnet ratio keeps zero or too many blocks
  invalid_sparsity,
  invalid_worker,
  incomplete_round,
  coverage,        // a parameter slice was held by no worker
  corruption,      // conflicting shapes for one slice
  format,          // checkpoint / file format problem
  io,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace twist
