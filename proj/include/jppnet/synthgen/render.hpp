// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "jppnet/core/random.hpp"
#include "jppnet/core/types.hpp"
#include "jppnet/synthgen/skeleton.hpp"

namespace jpp::synthgen {

enum class TorsoGarment : std::uint8_t { kUpperClothes, kCoat, kDress, kJumpsuit };
enum class LowerGarment : std::uint8_t { kPants, kSkirt };

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in pixel coordinates.
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(const Point2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

/// Sampling probabilities for clothing, accessories and occluders.
struct StyleOptions {
  double coat_prob = 0.25;
  double dress_prob = 0.12;
  double jumpsuit_prob = 0.06;
  double skirt_prob = 0.25;
  double hat_prob = 0.25;
  double small_part_prob = 0.08;  // sunglasses, gloves, socks, scarf (each)
  double occlusion_prob = 0.25;
  int occluder_min = 1;
  int occluder_max = 2;
};

/// Everything needed to draw one person besides the skeleton.
struct RenderStyle {
  // Radii in pixels.
  double torso_radius = 8.0;
  double arm_radius = 4.0;
  double leg_radius = 5.0;
  double hand_radius = 3.5;
  double foot_radius = 3.5;
  double foot_length = 8.0;

  std::array<Rgb, kNumPartClasses> colors{};
  std::uint64_t texture_seed = 0;
  int occluder_min = 0;
  int occluder_max = 0;

  TorsoGarment torso = TorsoGarment::kUpperClothes;
  LowerGarment lower = LowerGarment::kPants;
  bool hat = false;
  bool sunglasses = false;
  bool gloves = false;
  bool socks = false;
  bool scarf = false;

  std::vector<Rect> occluders;
  std::vector<Rgb> occluder_colors;

  /// Radii scale with the skeleton's body height; occluders are centred on
  /// random in-canvas joints so each one hides at least one joint.
  static RenderStyle sample(Rng& rng, const SampledSkeleton& skeleton, Canvas canvas,
                            const StyleOptions& options);

  /// Same style with left- and right-side colours exchanged.
  RenderStyle with_sides_swapped() const;
};

struct Rendering {
  RgbImage image;
  LabelMap labels;
  /// Joint annotation: joints under an occluder become occluded-but-annotated.
  JointSet joints;
};

/// Draws the person as labelled capsules in a fixed layer order (legs, socks,
/// shoes, lower garment, torso, neck, arms, scarf, head), then occluders.
/// Within a layer, overlapping shapes resolve to the nearest shape axis, so
/// the labels of a mirrored skeleton are the mirrored labels. Back-view
/// skeletons swap the side colours and draw the head without a face.
Rendering rasterize_person(const SampledSkeleton& skeleton, const RenderStyle& style,
                           Canvas canvas);

}  // namespace jpp::synthgen
