// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "jppnet/core/random.hpp"
#include "jppnet/core/types.hpp"

namespace jpp::synthgen {

struct Canvas {
  int height = 128;
  int width = 128;
};

/// One bone of the kinematic tree. The bone direction is the parent bone's
/// direction rotated by an angle drawn from [angle_min, angle_max] (radians,
/// clockwise in image coordinates). Bones leaving the pelvis are measured from
/// the body's up axis.
struct BoneSpec {
  Joint parent;
  Joint child;
  double length_min;  // pixels
  double length_max;
  double angle_min;
  double angle_max;
};

/// Where the pelvis lands and how often the body is pushed off-canvas.
struct TorsoAnchor {
  double center_x = 0.5;  // fraction of canvas width
  double center_y = 0.5;  // fraction of canvas height, before body offset
  double jitter = 0.06;   // fraction of canvas size
  double tilt_max = 0.12;  // radians
  double truncate_top_prob = 0.12;
  double truncate_bottom_prob = 0.12;
  double back_view_prob = 0.15;
};

struct SkeletonSpec {
  std::vector<BoneSpec> bones;
  TorsoAnchor anchor;
  double nominal_body_height = 0.0;  // pixels, head-top to ankle when upright

  /// Default human proportions for a person roughly 80% as tall as the canvas.
  static SkeletonSpec standard(Canvas canvas);

  /// Throws GenerationError unless bones form a tree over all 16 joints
  /// rooted at the pelvis, listed parent-before-child.
  void validate() const;
};

struct SampledSkeleton {
  /// Joint positions before clipping to the canvas (always defined).
  std::array<Point2, kNumJoints> positions{};
  /// Annotation view: off-canvas joints are absent, all others visible.
  JointSet joints;
  bool back_view = false;
  /// Body height implied by the torso length; scales part radii.
  double body_height = 0.0;
};

inline constexpr int kMinJointsInCanvas = 4;
inline constexpr int kSkeletonRetries = 64;

/// Samples a plausible pose. Coordinates are rounded to 1/100 pixel so they
/// survive the text round-trip of the annotation file.
SampledSkeleton sample_skeleton(Rng& rng, Canvas canvas, const SkeletonSpec& spec);

/// Marks joints outside the canvas absent.
JointSet clip_to_canvas(const std::array<Point2, kNumJoints>& positions, Canvas canvas);

/// Shifts the whole skeleton by (dx, dy) and re-clips to `canvas`.
SampledSkeleton translate(const SampledSkeleton& s, double dx, double dy, Canvas canvas);

/// Mirror image of `s` inside a canvas of the given width, with left/right
/// joints exchanged (the person-centric flip).
SampledSkeleton mirror(const SampledSkeleton& s, Canvas canvas);

}  // namespace jpp::synthgen
