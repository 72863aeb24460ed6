// SPDX-License-Identifier: Apache-2.0
#include "jppnet/metrics/decode.hpp"

#include <string>

#include "jppnet/core/errors.hpp"

namespace jpp::metrics {

LabelMap decode_parsing(const HeatmapStack& scores) {
  if (scores.channels() != kNumPartClasses) {
    throw ShapeError("parsing scores need " + std::to_string(kNumPartClasses) + " channels, got " +
                     std::to_string(scores.channels()));
  }
  const int h = scores.height(), w = scores.width();
  const std::size_t plane = scores.plane_size();
  std::vector<std::uint8_t> best(plane, 0);
  std::vector<float> best_score(scores.channel(0).begin(), scores.channel(0).end());
  for (int c = 1; c < kNumPartClasses; ++c) {
    const auto ch = scores.channel(c);
    for (std::size_t i = 0; i < plane; ++i) {
      if (ch[i] > best_score[i]) {
        best_score[i] = ch[i];
        best[i] = static_cast<std::uint8_t>(c);
      }
    }
  }
  return LabelMap::from_values(h, w, std::move(best));
}

JointSet decode_pose(const HeatmapStack& heatmaps, double stride, float tau) {
  if (heatmaps.channels() != kNumJoints) {
    throw ShapeError("pose heatmaps need " + std::to_string(kNumJoints) + " channels, got " +
                     std::to_string(heatmaps.channels()));
  }
  JointSet joints;
  const int w = heatmaps.width();
  for (int j = 0; j < kNumJoints; ++j) {
    const auto ch = heatmaps.channel(j);
    if (ch.empty()) continue;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < ch.size(); ++i) {
      if (ch[i] > ch[arg]) arg = i;
    }
    if (!(ch[arg] >= tau)) continue;
    const double x = static_cast<double>(arg % static_cast<std::size_t>(w)) * stride;
    const double y = static_cast<double>(arg / static_cast<std::size_t>(w)) * stride;
    joints.set(j, JointRecord::at(x, y));
  }
  return joints;
}

}  // namespace jpp::metrics
