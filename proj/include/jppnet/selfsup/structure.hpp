// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jppnet/core/types.hpp"
#include "jppnet/io/png.hpp"

namespace jpp::selfsup {

inline constexpr double kDefaultSigma = 3.0;

/// Part classes pooled into each pseudo-joint region. Classes listed in no
/// rule (background, dress, jumpsuit, gloves, socks) feed no region.
struct MergeRule {
  std::array<std::vector<Part>, kNumPseudoJoints> parts;

  static const MergeRule& standard();
  /// Throws ConfigError if a class appears in two rules.
  void validate() const;
  /// Class index -> pseudo-joint index, or -1.
  std::array<int, kNumPartClasses> lookup() const;
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  bool at(int y, int x) const {
    return cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)] != 0;
  }
  std::size_t count() const;
};

using RegionMasks = std::array<BinaryMask, kNumPseudoJoints>;
using PseudoCenters = std::array<std::optional<Point2>, kNumPseudoJoints>;

RegionMasks merge_parts(const LabelMap& m, const MergeRule& rule = MergeRule::standard());

/// Mean pixel coordinate, absent for an empty mask.
std::optional<Point2> region_center(const BinaryMask& mask);
PseudoCenters region_centers(const RegionMasks& masks);

/// One unit-amplitude isotropic Gaussian per centre; absent centres give
/// all-zero channels.
HeatmapStack render_gaussians(std::span<const std::optional<Point2>> centers, int height, int width,
                              double sigma);

/// Unit-amplitude Gaussians, one channel per pseudo-joint; absent centres give
/// all-zero channels.
HeatmapStack render_pseudo_heatmaps(const PseudoCenters& centers, int height, int width,
                                    double sigma = kDefaultSigma);

/// Centroids of `m` mapped onto a height x width grid (coordinates scaled by
/// height/m.height and width/m.width) and rendered.
HeatmapStack pseudo_joints_from_parsing(const LabelMap& m, int height, int width,
                                        double sigma = kDefaultSigma);

struct JointStructureLoss {
  double l_joint = 0.0;
  int n_present = 0;
};

/// Sum of squared differences over all channels divided by 2N, N being the
/// number of non-zero ground-truth channels; zero when N is zero.
JointStructureLoss joint_structure_loss(const HeatmapStack& c_p, const HeatmapStack& c_gt);

/// l_joint * l_parsing. The weight carries no gradient.
double structure_sensitive_loss(double l_joint, double l_parsing);

struct StructureLossReport {
  double l_joint = 0.0;
  double l_parsing = 0.0;
  double l_structure = 0.0;
  int n_present = 0;
};

/// Runs predicted and ground-truth parsing through the same pseudo-joint
/// pipeline at the prediction's resolution.
StructureLossReport structure_report(const LabelMap& predicted, const LabelMap& ground_truth,
                                     double l_parsing, double sigma = kDefaultSigma);

/// 3x3 grid of the nine channels scaled to 0..255, for visual inspection.
io::GrayImage heatmap_grid(const HeatmapStack& stack);

}  // namespace jpp::selfsup
