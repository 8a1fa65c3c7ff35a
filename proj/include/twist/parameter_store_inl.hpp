// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace twist {

void check_slice(const Tensor& tensor, const Slice& slice);

template <class F>
void for_each_slice_index(const Tensor& tensor, const Slice& slice, F&& f) {
  check_slice(tensor, slice);
  if (slice.axis < 0) {
    for (std::int64_t i = 0; i < tensor.numel(); ++i) f(i, i);
    return;
  }
  const std::int64_t cols = tensor.cols();
  const std::int64_t rows = tensor.rows();
  std::int64_t pos = 0;
  if (slice.axis == 0) {
    const std::int64_t width = tensor.rank() == 1 ? 1 : cols;
    for (std::int64_t i = slice.begin * width; i < slice.end * width; ++i) f(i, pos++);
    return;
  }
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = slice.begin; c < slice.end; ++c) f(r * cols + c, pos++);
}

}  // namespace twist
