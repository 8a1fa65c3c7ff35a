// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "twist/errors.hpp"

namespace twist {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::dimension: return "dimension error";
    case Errc::invalid_input: return "invalid input";
    case Errc::degenerate: return "degenerate input";
    case Errc::numeric: return "non-finite value";
    case Errc::infeasible: return "infeasible blueprint";
    case Errc::invalid_spec: return "invalid spec";
    case Errc::invalid_ratio: return "invalid ratio";
    case Errc::invalid_sparsity: return "invalid sparsity";
    case Errc::invalid_worker: return "invalid worker";
    case Errc::incomplete_round: return "incomplete round";
    case Errc::coverage: return "coverage error";
    case Errc::corruption: return "corruption error";
    case Errc::format: return "format error";
    case Errc::io: return "io error";
  }
  return "error";
}

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw Error(Errc::dimension, "negative extent in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size()))
    throw Error(Errc::dimension, "shape " + shape_str(shape_) + " does not match " +
                                     std::to_string(data_.size()) + " values");
}

std::int64_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  throw Error(Errc::dimension, "2-D view of rank-" + std::to_string(shape_.size()) + " tensor");
}

std::int64_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  throw Error(Errc::dimension, "2-D view of rank-" + std::to_string(shape_.size()) + " tensor");
}

std::span<float> Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0f);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0f);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor::identical(const Tensor& other) const {
  return shape_ == other.shape_ &&
         (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

}  // namespace twist
