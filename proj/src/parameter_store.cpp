// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/parameter_store.hpp"

#include "twist/errors.hpp"

namespace twist {

void ParameterStore::insert(const std::string& name, Tensor tensor) {
  tensors_.insert_or_assign(name, std::move(tensor));
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(Errc::corruption, "no parameter named '" + name + "'");
  return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(Errc::corruption, "no parameter named '" + name + "'");
  return it->second;
}

std::int64_t ParameterStore::param_count() const {
  std::int64_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.numel();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

void ParameterStore::set_requires_grad(bool on) {
  for (auto& [_, t] : tensors_) t.set_requires_grad(on);
}

void ParameterStore::zero_grad() {
  for (auto& [_, t] : tensors_) t.zero_grad();
}

void ParameterStore::clear_grad() {
  for (auto& [_, t] : tensors_) t.clear_grad();
}

bool ParameterStore::all_finite() const {
  for (const auto& [_, t] : tensors_)
    if (!t.all_finite()) return false;
  return true;
}

bool ParameterStore::identical(const ParameterStore& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  auto a = tensors_.begin();
  auto b = other.tensors_.begin();
  for (; a != tensors_.end(); ++a, ++b)
    if (a->first != b->first || !a->second.identical(b->second)) return false;
  return true;
}

std::string Slice::str() const {
  if (axis < 0) return name;
  return name + (axis == 0 ? "[" : "[:, ") + std::to_string(begin) + ":" + std::to_string(end) + "]";
}

void check_slice(const Tensor& tensor, const Slice& slice) {
  if (slice.axis < 0) return;
  if (slice.axis > 1 || (slice.axis == 1 && tensor.rank() != 2))
    throw Error(Errc::corruption, "slice " + slice.str() + " has an invalid axis for " + shape_str(tensor.shape()));
  const std::int64_t extent = slice.axis == 0 ? tensor.dim(0) : tensor.dim(1);
  if (slice.begin < 0 || slice.end < slice.begin || slice.end > extent)
    throw Error(Errc::corruption, "slice " + slice.str() + " out of range for " + shape_str(tensor.shape()));
}

std::int64_t slice_numel(const Tensor& tensor, const Slice& slice) {
  check_slice(tensor, slice);
  if (slice.axis < 0) return tensor.numel();
  const std::int64_t span = slice.end - slice.begin;
  if (slice.axis == 0) return span * (tensor.rank() == 1 ? 1 : tensor.cols());
  return span * tensor.rows();
}

std::vector<float> read_slice(const Tensor& tensor, const Slice& slice) {
  std::vector<float> out(static_cast<std::size_t>(slice_numel(tensor, slice)));
  for_each_slice_index(tensor, slice,
                       [&](std::int64_t i, std::int64_t p) { out[static_cast<std::size_t>(p)] = tensor[i]; });
  return out;
}

}  // namespace twist
