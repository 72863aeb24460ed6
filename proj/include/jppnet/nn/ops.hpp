// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jppnet/core/geometry.hpp"
#include "jppnet/nn/autograd.hpp"

namespace jpp::nn {

struct ConvSpec {
  int stride = 1;
  int pad = 0;
  int dilation = 1;

  /// Padding that keeps the spatial size for a stride-1 kernel of size k.
  static ConvSpec same(int k, int dilation = 1) { return {1, dilation * (k - 1) / 2, dilation}; }
};

/// x {C, H, W}, w {O, C, kh, kw}, optional b {O}.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, ConvSpec spec);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> scale(const Var<T>& x, T factor);

/// Concatenates {C_i, H, W} tensors along channels.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs);

template <typename T>
Var<T> max_pool2d(const Var<T>& x, int kernel, int stride, int pad);

/// Bilinear resize of every channel.
template <typename T>
Var<T> resize_bilinear(const Var<T>& x, int height, int width, Alignment alignment);

/// Elementwise maximum of equally shaped tensors; ties go to the earliest input.
template <typename T>
Var<T> max_elementwise(const std::vector<Var<T>>& xs);

/// Mean over pixels of the softmax cross-entropy of logits {20, H, W}
/// against H*W class indices. Returns a {1} tensor.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const std::uint8_t> labels);

/// Mean squared error against a constant target. Returns a {1} tensor.
template <typename T>
Var<T> mse(const Var<T>& pred, const Tensor<T>& target);

/// Plain per-pixel softmax over channels (no graph).
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits);

/// Plain bilinear resize (no graph), shared with the op above.
template <typename T>
Tensor<T> resize_bilinear_tensor(const Tensor<T>& x, int height, int width, Alignment alignment);

}  // namespace jpp::nn
