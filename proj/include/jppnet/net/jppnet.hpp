// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jppnet/core/types.hpp"
#include "jppnet/net/config.hpp"
#include "jppnet/nn/ops.hpp"

namespace jpp::net {

using nn::Tensor;
using nn::Var;

/// Ordered, named trainable tensors.
template <typename T>
class ParameterStore {
 public:
  Var<T> add(const std::string& name, Tensor<T> init);
  const Var<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<std::pair<std::string, Var<T>>>& entries() const { return entries_; }
  std::size_t weight_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Var<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Outputs of one stage at output-stride resolution. Pose members are null
/// for a parsing-only network.
template <typename T>
struct StageOutputs {
  Var<T> parsing;          // {20, h, w} logits
  Var<T> pose;             // {16, h, w}
  Var<T> parsing_context;  // {C_p, h, w}
  Var<T> pose_context;     // {C_q, h, w}
};

struct LayerTrace {
  std::string name;
  std::vector<int> shape;
};

/// Shared dilated residual backbone, part and joint modules, and the
/// iterative pose/parsing refinement stages. Weights are initialised from
/// (seed, layer name), so a layer gets the same initial values in every
/// network variant that contains it.
template <typename T>
class JppNet {
 public:
  JppNet(NetConfig config, std::uint64_t seed);

  const NetConfig& config() const { return config_; }
  ParameterStore<T>& parameters() { return params_; }
  const ParameterStore<T>& parameters() const { return params_; }

  /// image is {3, H, W} with H and W multiples of the output stride.
  /// Returns 1 + refine_stages outputs.
  std::vector<StageOutputs<T>> forward(const Tensor<T>& image) const;

  /// When set, forward appends every layer's output shape (first scale only).
  void set_trace(std::vector<LayerTrace>* trace) const { trace_ = trace; }

 private:
  void declare_conv(const std::string& name, int in, int out, int k, double stddev);
  void declare_backbone();
  void declare_refinement(const std::string& prefix, bool parsing);
  Var<T> conv(const std::string& name, const Var<T>& x, nn::ConvSpec spec, bool relu) const;
  Var<T> aspp(const std::string& prefix, const Var<T>& x) const;
  std::vector<StageOutputs<T>> forward_single(const Var<T>& x) const;
  void record(const std::string& name, const Var<T>& v) const;

  NetConfig config_;
  std::uint64_t seed_;
  ParameterStore<T> params_;
  mutable std::vector<LayerTrace>* trace_ = nullptr;
};

/// RGB bytes to a {3, H, W} tensor scaled to [-1, 1].
template <typename T>
Tensor<T> image_tensor(const RgbImage& image);

/// Spatial size used for an input of `size` pixels at scale `s`: rounded to
/// the nearest multiple of `stride`, at least one stride.
int scaled_size(int size, double s, int stride);

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template class JppNet<float>;
extern template class JppNet<double>;

}  // namespace jpp::net
