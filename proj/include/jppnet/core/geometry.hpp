// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jppnet/core/types.hpp"

namespace jpp {

/// Sampling-grid convention for bilinear resampling.
///
/// kHalfPixel treats values as pixel-area samples (output pixel centre
/// (x + 0.5) maps to source (x + 0.5) * src/dst - 0.5). kOrigin treats them as
/// point samples anchored at the origin (source x * src/dst), which is the
/// convention used for joint heatmaps, where map coordinate = image / stride.
enum class Alignment { kHalfPixel, kOrigin };

/// Source taps for destination index i when resampling src -> dst samples.
struct BilinearTap {
  int lo;
  int hi;
  double frac;  // weight of `hi`
};
BilinearTap bilinear_tap(int i, int src, int dst, Alignment alignment);

/// Mirrors columns and exchanges left/right part classes.
LabelMap flip_label_map(const LabelMap& m);

/// Mirrors present joints (x -> width - 1 - x) and exchanges left/right slots.
JointSet flip_joint_set(const JointSet& j, int width);

RgbImage flip_image(const RgbImage& image);

/// Mirrors every channel; when `swap_joint_channels` is set, channel k is
/// moved to its left/right partner (requires 16 channels).
HeatmapStack flip_heatmaps(const HeatmapStack& s, bool swap_joint_channels);

/// Mirrors 20 per-class score maps and exchanges left/right class channels.
HeatmapStack flip_class_scores(const HeatmapStack& s);

/// Nearest-neighbour resampling, source index floor((i + 0.5) * src / dst).
LabelMap resize_label_map(const LabelMap& m, int height, int width);

HeatmapStack resize_heatmaps(const HeatmapStack& s, int height, int width,
                             Alignment alignment = Alignment::kHalfPixel);

RgbImage resize_image(const RgbImage& image, int height, int width);

/// Scales joint coordinates by (sx, sy); absent joints stay absent.
JointSet scale_joint_set(const JointSet& j, double sx, double sy);

/// Re-expresses joints relative to the window [x0, x0 + width) x [y0, y0 + height);
/// joints falling outside become absent.
JointSet crop_joint_set(const JointSet& j, double x0, double y0, int height, int width);

/// Copies the window starting at (x0, y0); out-of-range cells take `fill`.
LabelMap crop_label_map(const LabelMap& m, int x0, int y0, int height, int width,
                        std::uint8_t fill = 0);
RgbImage crop_image(const RgbImage& image, int x0, int y0, int height, int width, Rgb fill);

bool inside(const Point2& p, int height, int width);

}  // namespace jpp
