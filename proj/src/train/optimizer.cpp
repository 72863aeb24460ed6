// SPDX-License-Identifier: Apache-2.0
#include "jppnet/train/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace jpp::train {

double poly_learning_rate(double base, double power, long step, long total) {
  if (total <= 0) return base;
  const double frac = 1.0 - static_cast<double>(std::clamp(step, 0L, total)) / total;
  return base * std::pow(frac, power);
}

template <typename T>
double SgdMomentum<T>::step(net::ParameterStore<T>& params, double lr) {
  double sq = 0.0;
  for (auto& [name, p] : params.entries()) {
    if (p->grad.size() == 0) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      const double g = p->grad[i];
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  const double clip = grad_clip_ > 0.0 && norm > grad_clip_ ? grad_clip_ / norm : 1.0;

  for (auto& [name, p] : params.entries()) {
    auto [it, fresh] = velocity_.try_emplace(name, p->value.shape());
    nn::Tensor<T>& v = it->second;
    const bool has_grad = p->grad.size() == p->value.size();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = (has_grad ? clip * p->grad[i] : 0.0) + weight_decay_ * p->value[i];
      const double nv = momentum_ * v[i] - lr * g;
      v[i] = static_cast<T>(nv);
      p->value[i] = static_cast<T>(p->value[i] + nv);
    }
  }
  params.zero_grad();
  return norm;
}

template class SgdMomentum<float>;
template class SgdMomentum<double>;

}  // namespace jpp::train
