// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "jppnet/core/types.hpp"
#include "jppnet/net/jppnet.hpp"
#include "jppnet/train/config.hpp"

namespace jpp::train {

/// 16 unit Gaussians centred at joint / stride on a height x width grid;
/// absent joints give zero channels.
HeatmapStack gt_pose_heatmaps(const JointSet& joints, int height, int width, int stride,
                              double sigma);

/// Mean softmax cross-entropy of {20, h, w} scores against an h x w label map.
template <typename T>
nn::Var<T> parsing_loss(const nn::Var<T>& scores, const LabelMap& gt);

/// Mean squared error over all channels and pixels.
template <typename T>
nn::Var<T> pose_loss(const nn::Var<T>& pred, const HeatmapStack& gt);

/// Pose targets live at the network's output resolution. Labels match it
/// too unless the weights ask for upsampled scores.
struct LossTargets {
  LabelMap labels;
  std::optional<HeatmapStack> pose;  // unused in ss mode
};

struct LossWeights {
  std::vector<double> parsing;  // one per stage
  std::vector<double> pose;
  double structure_sigma = 3.0;
  /// Bilinearly upsample parsing scores to the label resolution before the
  /// loss instead of expecting labels at the output resolution.
  bool upsample_scores = false;

  static LossWeights from(const TrainConfig& cfg, int stages);
};

struct LossBreakdown {
  std::vector<double> parsing;  // per-stage cross-entropy
  std::vector<double> pose;     // per-stage MSE, empty without pose outputs
  double weighted_parsing = 0.0;
  double weighted_pose = 0.0;
  double l_joint = 0.0;  // ss mode only
  double total = 0.0;
};

template <typename T>
struct LossResult {
  LossBreakdown breakdown;
  nn::Var<T> total;
};

/// Joint mode: sum_s w_parse[s] * parsing_loss + sum_s w_pose[s] * pose_loss
/// (pose terms only for stages that predict pose). Structure mode: the
/// weighted parsing sum multiplied by l_joint, which is computed from the
/// decoded final-stage parsing against the labels and carries no gradient.
template <typename T>
LossResult<T> total_loss(const std::vector<net::StageOutputs<T>>& stages,
                         const LossTargets& targets, const LossWeights& weights, Mode mode);

}  // namespace jpp::train
