// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "jppnet/nn/tensor.hpp"

namespace jpp::nn {

template <typename T>
struct Node;

template <typename T>
using Var = std::shared_ptr<Node<T>>;

/// A value in the computation graph. Ops record their parents and a closure
/// that pushes this node's gradient into them.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first use
  bool requires_grad = false;
  std::vector<Var<T>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor<T>& grad_buffer();
};

/// Gradient recording is on by default; a NoGradGuard turns it off for the
/// current thread so intermediates are freed as soon as they go out of scope.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
Var<T> constant(Tensor<T> value);

template <typename T>
Var<T> leaf(Tensor<T> value);  // requires_grad leaf, e.g. a parameter

/// Creates the output node of an op. `parents` and `fn` are dropped when
/// recording is off or no parent needs a gradient.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> fn);

/// Back-propagates from a scalar node (seed gradient 1) and releases the
/// graph behind it. Leaf gradients accumulate.
template <typename T>
void backward(const Var<T>& root);

}  // namespace jpp::nn
