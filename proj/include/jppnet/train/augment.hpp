// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jppnet/core/random.hpp"
#include "jppnet/synthgen/dataset.hpp"
#include "jppnet/train/config.hpp"

namespace jpp::train {

/// Colour used for crop padding; it maps to zero in the network input.
inline constexpr Rgb kPadColor{128, 128, 128};

struct AugmentParams {
  double scale = 1.0;
  int x0 = 0;  // crop origin in the scaled image, may be negative (padding)
  int y0 = 0;
  bool flip = false;
};

/// Draws scale, crop origin and flip in that order. When augmentation is
/// disabled the result is scale 1, a centred crop and no flip.
AugmentParams draw_augment(Rng& rng, int height, int width, const AugmentConfig& cfg);

/// Scales (bilinear image, nearest labels), crops to crop_size x crop_size
/// padding with background and kPadColor, then flips. Joints follow the same
/// pixel-centre mapping; joints leaving the crop become absent.
synthgen::SampleRecord apply_augment(const synthgen::SampleRecord& sample,
                                     const AugmentParams& params, int crop_size);

synthgen::SampleRecord augment(const synthgen::SampleRecord& sample, Rng& rng,
                               const AugmentConfig& cfg);

}  // namespace jpp::train
