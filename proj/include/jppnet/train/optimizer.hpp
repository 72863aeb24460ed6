// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "jppnet/net/jppnet.hpp"

namespace jpp::train {

/// Polynomial decay: base * (1 - step / total)^power.
double poly_learning_rate(double base, double power, long step, long total);

/// SGD with momentum: v = m v - lr (g + wd w); w += v.
template <typename T>
class SgdMomentum {
 public:
  SgdMomentum(double momentum, double weight_decay, double grad_clip = 0.0)
      : momentum_(momentum), weight_decay_(weight_decay), grad_clip_(grad_clip) {}

  /// Applies one update from the accumulated gradients and clears them.
  /// Returns the gradient norm before clipping.
  double step(net::ParameterStore<T>& params, double lr);

  const std::map<std::string, nn::Tensor<T>>& velocity() const { return velocity_; }
  std::map<std::string, nn::Tensor<T>>& velocity() { return velocity_; }

 private:
  double momentum_;
  double weight_decay_;
  double grad_clip_;
  std::map<std::string, nn::Tensor<T>> velocity_;
};

extern template class SgdMomentum<float>;
extern template class SgdMomentum<double>;

}  // namespace jpp::train
