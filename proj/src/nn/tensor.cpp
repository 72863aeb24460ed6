// SPDX-License-Identifier: Apache-2.0
#include "jppnet/nn/tensor.hpp"

#include <algorithm>

#include "jppnet/core/errors.hpp"

namespace jpp::nn {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative tensor dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape, T fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  return nn::shape_string(shape_);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace jpp::nn
