// SPDX-License-Identifier: Apache-2.0
#include "jppnet/nn/autograd.hpp"

#include <unordered_set>

#include "jppnet/core/errors.hpp"

namespace jpp::nn {
namespace {

thread_local bool t_grad_enabled = true;

}  // namespace

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

template <typename T>
Tensor<T>& Node<T>::grad_buffer() {
  if (grad.size() != value.size() || !grad.same_shape(value)) grad = Tensor<T>(value.shape());
  return grad;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  return n;
}

template <typename T>
Var<T> leaf(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  if (!t_grad_enabled) return n;
  bool any = false;
  for (const auto& p : parents) any |= p && p->requires_grad;
  if (!any) return n;
  n->requires_grad = true;
  n->parents = std::move(parents);
  n->backward_fn = std::move(fn);
  return n;
}

template <typename T>
void backward(const Var<T>& root) {
  if (root->value.size() != 1) throw ShapeError("backward needs a scalar root");
  if (!root->requires_grad) return;

  // Iterative post-order gives a topological order; walk it in reverse. The
  // order holds owning pointers so clearing links below frees nothing early.
  std::vector<Var<T>> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Var<T>, std::size_t>> stack{{root, 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const Var<T>& p = node->parents[next++];
      if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back({p, 0});
    } else {
      order.push_back(std::move(node));
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = it->get();
    if (node->backward_fn) {
      if (node->grad.size() == node->value.size()) node->backward_fn(*node);
      // Interior nodes are done; free their graph links and gradients.
      node->backward_fn = nullptr;
      node->parents.clear();
      node->grad = Tensor<T>();
    }
  }
}

#define JPP_INSTANTIATE(T)                                                                   \
  template struct Node<T>;                                                                   \
  template Var<T> constant(Tensor<T>);                                                       \
  template Var<T> leaf(Tensor<T>);                                                           \
  template Var<T> make_result(Tensor<T>, std::vector<Var<T>>, std::function<void(Node<T>&)>); \
  template void backward(const Var<T>&);

JPP_INSTANTIATE(float)
JPP_INSTANTIATE(double)

}  // namespace jpp::nn
