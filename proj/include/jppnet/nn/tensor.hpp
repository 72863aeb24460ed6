// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace jpp::nn {

/// 64-byte aligned storage. Every buffer then starts on the same boundary,
/// so vectorised loops split their work identically from run to run and
/// floating-point results do not depend on where the heap placed the data.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major array. Activations are stored per sample as {C, H, W},
/// convolution weights as {O, I, kh, kw}.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0));

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  // {C, H, W} accessors.
  T& at(int c, int y, int x) { return data_[offset(c, y, x)]; }
  T at(int c, int y, int x) const { return data_[offset(c, y, x)]; }

  void fill(T v);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(shape_[1]) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(shape_[2]) +
           static_cast<std::size_t>(x);
  }

  std::vector<int> shape_;
  AlignedVector<T> data_;
};

std::string shape_string(const std::vector<int>& shape);
std::size_t shape_size(const std::vector<int>& shape);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace jpp::nn
