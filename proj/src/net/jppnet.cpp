// SPDX-License-Identifier: Apache-2.0
#include "jppnet/net/jppnet.hpp"

#include <cmath>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/random.hpp"

namespace jpp::net {

template <typename T>
Var<T> ParameterStore<T>::add(const std::string& name, Tensor<T> init) {
  if (contains(name)) throw Error("duplicate parameter " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, nn::leaf(std::move(init)));
  return entries_.back().second;
}

template <typename T>
const Var<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named " + name);
  return entries_[it->second].second;
}

template <typename T>
std::size_t ParameterStore<T>::weight_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v->value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& [name, v] : entries_) v->grad = Tensor<T>();
}

int scaled_size(int size, double s, int stride) {
  const long steps = std::lround(size * s / stride);
  return static_cast<int>(std::max(1L, steps)) * stride;
}

template <typename T>
Tensor<T> image_tensor(const RgbImage& image) {
  const int h = image.height(), w = image.width();
  Tensor<T> t({3, h, w});
  const auto bytes = image.bytes();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      t[c * plane + i] = static_cast<T>(bytes[3 * i + c]) / T(127.5) - T(1);
    }
  }
  return t;
}

template <typename T>
JppNet<T>::JppNet(NetConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  const NetConfig& c = config_;
  auto he = [](int in, int k) { return std::sqrt(2.0 / (in * k * k)); };
  auto lin = [](int in, int k) { return std::sqrt(1.0 / (in * k * k)); };
  const double aspp_scale = 1.0 / std::sqrt(static_cast<double>(c.aspp_rates.size()));

  declare_backbone();

  const int res4 = c.stage_channels[2], res5 = c.stage_channels[3];
  declare_conv("part.conv-1", res5, c.part_channels[0], 3, he(res5, 3));
  declare_conv("part.conv-2", c.part_channels[0], c.part_channels[1], 3, he(c.part_channels[0], 3));
  for (int r : c.aspp_rates) {
    declare_conv("part.aspp.rate" + std::to_string(r), res5, kNumPartClasses, 3,
                 lin(res5, 3) * aspp_scale);
  }
  if (!c.with_pose) return;

  int in = res4;
  for (int i = 0; i < 8; ++i) {
    const int k = i < 6 ? 3 : 1;
    const int out = c.joint_channels[i];
    declare_conv("joint.conv-" + std::to_string(i + 1), in, out, k, i == 7 ? lin(in, k) : he(in, k));
    in = out;
  }
  for (int s = 1; s <= c.refine_stages; ++s) {
    declare_refinement("pose_refine" + std::to_string(s), false);
    declare_refinement("parsing_refine" + std::to_string(s), true);
  }
}

template <typename T>
void JppNet<T>::declare_conv(const std::string& name, int in, int out, int k, double stddev) {
  Rng rng(derive_seed(seed_, hash_string(name)));
  Tensor<T> w({out, in, k, k});
  for (T& v : w.values()) v = static_cast<T>(rng.normal(0.0, stddev));
  params_.add(name + ".weight", std::move(w));
  params_.add(name + ".bias", Tensor<T>({out}));
}

template <typename T>
void JppNet<T>::declare_backbone() {
  const NetConfig& c = config_;
  auto he = [](int in, int k) { return std::sqrt(2.0 / (in * k * k)); };
  declare_conv("res1.conv", 3, c.stem_channels, 7, he(3, 7));
  int in = c.stem_channels;
  for (int stage = 0; stage < 4; ++stage) {
    const int out = c.stage_channels[stage];
    const int mid = out / c.bottleneck_ratio;
    for (int b = 0; b < c.stage_blocks[stage]; ++b) {
      const std::string name = "res" + std::to_string(stage + 2) + ".block" + std::to_string(b);
      declare_conv(name + ".conv1", in, mid, 1, he(in, 1));
      declare_conv(name + ".conv2", mid, mid, 3, he(mid, 3));
      declare_conv(name + ".conv3", mid, out, 1, he(mid, 1) * c.residual_init_scale);
      if (b == 0) declare_conv(name + ".proj", in, out, 1, std::sqrt(1.0 / in));
      in = out;
    }
  }
}

template <typename T>
void JppNet<T>::declare_refinement(const std::string& prefix, bool parsing) {
  const NetConfig& c = config_;
  auto he = [](int in, int k) { return std::sqrt(2.0 / (in * k * k)); };
  auto lin = [](int in, int k) { return std::sqrt(1.0 / (in * k * k)); };
  declare_conv(prefix + ".remap-1", kNumJoints, c.remap_channels, 1, he(kNumJoints, 1));
  declare_conv(prefix + ".remap-2", kNumPartClasses, c.remap_channels, 1, he(kNumPartClasses, 1));
  int in = c.refine_concat;
  for (int i = 0; i < 5; ++i) {
    const int k = c.refine_kernels[i];
    declare_conv(prefix + ".conv-" + std::to_string(i + 1), in, c.refine_channels[i], k, he(in, k));
    in = c.refine_channels[i];
  }
  if (parsing) {
    const double aspp_scale = 1.0 / std::sqrt(static_cast<double>(c.aspp_rates.size()));
    for (int r : c.aspp_rates) {
      declare_conv(prefix + ".aspp.rate" + std::to_string(r), in, kNumPartClasses, 3,
                   lin(in, 3) * aspp_scale);
    }
  } else {
    declare_conv(prefix + ".conv-6", in, kNumJoints, 1, lin(in, 1));
  }
}

template <typename T>
void JppNet<T>::record(const std::string& name, const Var<T>& v) const {
  if (trace_) trace_->push_back({name, v->value.shape()});
}

template <typename T>
Var<T> JppNet<T>::conv(const std::string& name, const Var<T>& x, nn::ConvSpec spec,
                       bool relu) const {
  Var<T> y = nn::conv2d(x, params_.get(name + ".weight"), params_.get(name + ".bias"), spec);
  if (relu) y = nn::relu(y);
  record(name, y);
  return y;
}

template <typename T>
Var<T> JppNet<T>::aspp(const std::string& prefix, const Var<T>& x) const {
  Var<T> sum;
  for (int r : config_.aspp_rates) {
    const std::string name = prefix + ".rate" + std::to_string(r);
    Var<T> y = nn::conv2d(x, params_.get(name + ".weight"), params_.get(name + ".bias"),
                          nn::ConvSpec::same(3, r));
    sum = sum ? nn::add(sum, y) : y;
  }
  record(prefix, sum);
  return sum;
}

template <typename T>
std::vector<StageOutputs<T>> JppNet<T>::forward_single(const Var<T>& image) const {
  const NetConfig& c = config_;
  Var<T> x = conv("res1.conv", image, {2, 3, 1}, true);
  x = nn::max_pool2d(x, 3, 2, 1);
  record("res1.pool", x);

  Var<T> res4;
  for (int stage = 0; stage < 4; ++stage) {
    int stride = 1, dilation = 1;
    if (stage == 1) stride = 2;
    if (stage == 2) (c.output_stride == 8 ? dilation : stride) = 2;
    if (stage == 3) dilation = c.output_stride == 8 ? 4 : 2;
    for (int b = 0; b < c.stage_blocks[stage]; ++b) {
      const std::string name = "res" + std::to_string(stage + 2) + ".block" + std::to_string(b);
      const int s = b == 0 ? stride : 1;
      Var<T> h = conv(name + ".conv1", x, {}, true);
      h = conv(name + ".conv2", h, {s, dilation, dilation}, true);
      h = conv(name + ".conv3", h, {}, false);
      Var<T> shortcut = b == 0 ? conv(name + ".proj", x, {s, 0, 1}, false) : x;
      x = nn::relu(nn::add(h, shortcut));
    }
    record("res" + std::to_string(stage + 2), x);
    if (stage == 2) res4 = x;
  }
  const Var<T>& res5 = x;

  StageOutputs<T> s0;
  Var<T> p = conv("part.conv-1", res5, nn::ConvSpec::same(3), true);
  s0.parsing_context = conv("part.conv-2", p, nn::ConvSpec::same(3), true);
  s0.parsing = aspp("part.aspp", res5);
  std::vector<StageOutputs<T>> out;
  if (!c.with_pose) {
    out.push_back(std::move(s0));
    return out;
  }

  Var<T> q = res4;
  for (int i = 1; i <= 8; ++i) {
    const int k = i <= 6 ? 3 : 1;
    q = conv("joint.conv-" + std::to_string(i), q, nn::ConvSpec::same(k), i != 8);
    if (i == 6) s0.pose_context = q;
  }
  s0.pose = q;
  out.push_back(std::move(s0));

  for (int s = 1; s <= c.refine_stages; ++s) {
    const StageOutputs<T>& prev = out.back();
    StageOutputs<T> next;
    for (bool parsing : {false, true}) {
      const std::string prefix = (parsing ? "parsing_refine" : "pose_refine") + std::to_string(s);
      Var<T> r1 = conv(prefix + ".remap-1", prev.pose, {}, true);
      Var<T> r2 = conv(prefix + ".remap-2", prev.parsing, {}, true);
      Var<T> cat = nn::concat_channels<T>(
          {r1, r2, parsing ? prev.parsing_context : prev.pose_context});
      if (cat->value.dim(0) != c.refine_concat) {
        throw ShapeError(prefix + " concat has " + std::to_string(cat->value.dim(0)) +
                         " channels, expected " + std::to_string(c.refine_concat));
      }
      record(prefix + ".concat", cat);
      Var<T> h = cat;
      for (int i = 0; i < 5; ++i) {
        h = conv(prefix + ".conv-" + std::to_string(i + 1), h,
                 nn::ConvSpec::same(c.refine_kernels[i]), true);
      }
      if (parsing) {
        next.parsing_context = h;
        next.parsing = aspp(prefix + ".aspp", h);
      } else {
        next.pose_context = h;
        next.pose = conv(prefix + ".conv-6", h, {}, false);
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

template <typename T>
std::vector<StageOutputs<T>> JppNet<T>::forward(const Tensor<T>& image) const {
  const int stride = config_.output_stride;
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("network input must be {3, H, W}, got " + image.shape_string());
  }
  const int h = image.dim(1), w = image.dim(2);
  if (h % stride != 0 || w % stride != 0 || h < stride || w < stride) {
    throw ShapeError("input " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not divisible by the output stride " + std::to_string(stride));
  }
  Var<T> x = nn::constant(image);
  if (!config_.msc) return forward_single(x);

  // Multi-scale: shared weights at every scale, score maps resized to the
  // first scale's output grid and fused by elementwise max per stage.
  const int oh = scaled_size(h, config_.msc_scales[0], stride) / stride;
  const int ow = scaled_size(w, config_.msc_scales[0], stride) / stride;
  std::vector<std::vector<StageOutputs<T>>> runs;
  std::vector<LayerTrace>* saved = trace_;
  for (double s : config_.msc_scales) {
    const int sh = scaled_size(h, s, stride), sw = scaled_size(w, s, stride);
    Var<T> xs = nn::resize_bilinear(x, sh, sw, Alignment::kHalfPixel);
    runs.push_back(forward_single(xs));
    trace_ = nullptr;
  }
  trace_ = saved;
  std::vector<StageOutputs<T>> fused(runs[0].size());
  for (std::size_t st = 0; st < fused.size(); ++st) {
    std::vector<Var<T>> parsing, pose;
    for (auto& run : runs) {
      parsing.push_back(nn::resize_bilinear(run[st].parsing, oh, ow, Alignment::kHalfPixel));
      if (run[st].pose) pose.push_back(nn::resize_bilinear(run[st].pose, oh, ow, Alignment::kOrigin));
    }
    fused[st].parsing = nn::max_elementwise(parsing);
    if (!pose.empty()) fused[st].pose = nn::max_elementwise(pose);
    fused[st].parsing_context = runs[0][st].parsing_context;
    fused[st].pose_context = runs[0][st].pose_context;
    record("msc.stage" + std::to_string(st) + ".parsing", fused[st].parsing);
  }
  return fused;
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class JppNet<float>;
template class JppNet<double>;
template Tensor<float> image_tensor<float>(const RgbImage&);
template Tensor<double> image_tensor<double>(const RgbImage&);

}  // namespace jpp::net
