// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twist/tensor.hpp"

namespace twist {

/// Named tensors of one model (central or subnet). Iteration order is the
/// lexicographic name order, which fixes serialization and reduction order.
class ParameterStore {
 public:
  using Map = std::map<std::string, Tensor>;

  void insert(const std::string& name, Tensor tensor);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return tensors_.size(); }
  std::int64_t param_count() const;
  std::vector<std::string> names() const;

  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  void set_requires_grad(bool on);
  void zero_grad();
  void clear_grad();
  bool all_finite() const;

  /// Bitwise equality of names, shapes and values.
  bool identical(const ParameterStore& other) const;

 private:
  Map tensors_;
};

/// A rectangular piece of a named tensor. axis < 0 selects the whole tensor,
/// axis 0 selects rows [begin, end) (elements for rank-1 tensors) and axis 1
/// selects columns [begin, end).
struct Slice {
  std::string name;
  int axis = -1;
  std::int64_t begin = 0;
  std::int64_t end = 0;

  static Slice whole(std::string name) { return Slice{std::move(name), -1, 0, 0}; }
  std::string str() const;
  auto operator<=>(const Slice&) const = default;
};

/// Number of scalars covered by the slice inside `tensor`.
std::int64_t slice_numel(const Tensor& tensor, const Slice& slice);
/// Copies the slice out row-major. Throws Errc::corruption if out of range.
std::vector<float> read_slice(const Tensor& tensor, const Slice& slice);
/// Visits (flat index in tensor, position within slice) pairs in row-major order.
template <class F>
void for_each_slice_index(const Tensor& tensor, const Slice& slice, F&& f);

}  // namespace twist

#include "twist/parameter_store_inl.hpp"
