// SPDX-License-Identifier: Apache-2.0
#include "jppnet/train/losses.hpp"

#include <array>
#include <string>

#include "jppnet/core/errors.hpp"
#include "jppnet/metrics/decode.hpp"
#include "jppnet/selfsup/structure.hpp"

namespace jpp::train {

HeatmapStack gt_pose_heatmaps(const JointSet& joints, int height, int width, int stride,
                              double sigma) {
  if (stride < 1) throw ShapeError("stride must be positive");
  std::array<std::optional<Point2>, kNumJoints> centers;
  for (int j = 0; j < kNumJoints; ++j) {
    if (joints[j].present()) centers[j] = Point2{joints[j].x / stride, joints[j].y / stride};
  }
  return selfsup::render_gaussians(centers, height, width, sigma);
}

template <typename T>
nn::Var<T> parsing_loss(const nn::Var<T>& scores, const LabelMap& gt) {
  const auto& v = scores->value;
  if (v.rank() != 3 || v.dim(0) != kNumPartClasses || v.dim(1) != gt.height() ||
      v.dim(2) != gt.width()) {
    throw ShapeError("parsing scores " + v.shape_string() + " do not match labels " +
                     std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  return nn::softmax_cross_entropy(scores, gt.values());
}

template <typename T>
nn::Var<T> pose_loss(const nn::Var<T>& pred, const HeatmapStack& gt) {
  const auto& v = pred->value;
  if (v.rank() != 3 || v.dim(0) != gt.channels() || v.dim(1) != gt.height() ||
      v.dim(2) != gt.width()) {
    throw ShapeError("pose prediction " + v.shape_string() + " does not match target " +
                     std::to_string(gt.channels()) + "x" + std::to_string(gt.height()) + "x" +
                     std::to_string(gt.width()));
  }
  nn::Tensor<T> target(v.shape());
  const auto src = gt.values();
  for (std::size_t i = 0; i < src.size(); ++i) target[i] = static_cast<T>(src[i]);
  return nn::mse(pred, target);
}

LossWeights LossWeights::from(const TrainConfig& cfg, int stages) {
  return {cfg.parsing_weights(stages), cfg.pose_weights(stages), cfg.structure_sigma,
          cfg.parsing_loss_resolution == LossResolution::kInput};
}

namespace {

template <typename T>
nn::Var<T> accumulate(const nn::Var<T>& sum, const nn::Var<T>& term, double w) {
  nn::Var<T> scaled = nn::scale(term, static_cast<T>(w));
  return sum ? nn::add(sum, scaled) : scaled;
}

template <typename T>
LabelMap decode_stage(const nn::Var<T>& logits) {
  const auto& v = logits->value;
  HeatmapStack stack(v.dim(0), v.dim(1), v.dim(2));
  auto dst = stack.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(v[i]);
  return metrics::decode_parsing(stack);
}

}  // namespace

template <typename T>
LossResult<T> total_loss(const std::vector<net::StageOutputs<T>>& stages,
                         const LossTargets& targets, const LossWeights& weights, Mode mode) {
  if (stages.empty()) throw ShapeError("no stage outputs");
  const std::size_t n = stages.size();
  if (weights.parsing.size() != n) throw ConfigError("parsing weights do not match stage count");

  LossResult<T> out;
  LossBreakdown& b = out.breakdown;
  const int lh = targets.labels.height();
  const int lw = targets.labels.width();
  std::vector<nn::Var<T>> scores;
  for (const auto& stage : stages) {
    scores.push_back(weights.upsample_scores
                         ? nn::resize_bilinear(stage.parsing, lh, lw, Alignment::kHalfPixel)
                         : stage.parsing);
  }
  nn::Var<T> parsing_sum;
  for (std::size_t s = 0; s < n; ++s) {
    nn::Var<T> ce = parsing_loss(scores[s], targets.labels);
    b.parsing.push_back(static_cast<double>(ce->value[0]));
    b.weighted_parsing += weights.parsing[s] * b.parsing.back();
    parsing_sum = accumulate(parsing_sum, ce, weights.parsing[s]);
  }

  if (mode == Mode::kStructure) {
    const LabelMap predicted = decode_stage(scores.back());
    const auto report = selfsup::structure_report(predicted, targets.labels, 0.0,
                                                  weights.structure_sigma);
    b.l_joint = report.l_joint;
    out.total = nn::scale(parsing_sum, static_cast<T>(b.l_joint));
    b.total = static_cast<double>(out.total->value[0]);
    return out;
  }

  nn::Var<T> total = parsing_sum;
  for (std::size_t s = 0; s < n; ++s) {
    if (!stages[s].pose) continue;
    if (!targets.pose) throw DataError("pose target missing for a network with pose outputs");
    if (weights.pose.size() != n) throw ConfigError("pose weights do not match stage count");
    nn::Var<T> mse = pose_loss(stages[s].pose, *targets.pose);
    b.pose.push_back(static_cast<double>(mse->value[0]));
    b.weighted_pose += weights.pose[s] * b.pose.back();
    total = accumulate(total, mse, weights.pose[s]);
  }
  out.total = total;
  b.total = static_cast<double>(total->value[0]);
  return out;
}

#define JPP_INSTANTIATE(T)                                                                 \
  template nn::Var<T> parsing_loss(const nn::Var<T>&, const LabelMap&);                    \
  template nn::Var<T> pose_loss(const nn::Var<T>&, const HeatmapStack&);                   \
  template LossResult<T> total_loss(const std::vector<net::StageOutputs<T>>&,              \
                                    const LossTargets&, const LossWeights&, Mode);
JPP_INSTANTIATE(float)
JPP_INSTANTIATE(double)
#undef JPP_INSTANTIATE

}  // namespace jpp::train
