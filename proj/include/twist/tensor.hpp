// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace twist {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major float32 tensor. Rank 1 and 2 are the only ranks the model
/// uses; higher ranks are stored but only addressed through data().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::int64_t dim(std::size_t i) const { return shape_.at(i); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

  // 2-D view helpers; a rank-1 tensor is treated as a single row.
  std::int64_t rows() const;
  std::int64_t cols() const;

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::vector<float>& storage() { return data_; }
  const std::vector<float>& storage() const { return data_; }

  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  float& at(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * cols() + c)]; }
  float at(std::int64_t r, std::int64_t c) const { return data_[static_cast<std::size_t>(r * cols() + c)]; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return !grad_.empty(); }
  std::span<float> grad() { return grad_; }
  std::span<const float> grad() const { return grad_; }
  /// Allocates a zero gradient buffer if none exists.
  std::span<float> ensure_grad();
  void zero_grad();
  void clear_grad() { grad_.clear(); grad_.shrink_to_fit(); }

  bool all_finite() const;

  /// Exact shape and bit-pattern equality of the values (gradients ignored).
  bool identical(const Tensor& other) const;

 private:
  Shape shape_;
  std::vector<float> data_;
  bool requires_grad_ = false;
  std::vector<float> grad_;
};

}  // namespace twist
