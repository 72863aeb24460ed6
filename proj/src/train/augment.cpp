// SPDX-License-Identifier: Apache-2.0
#include "jppnet/train/augment.hpp"

#include <algorithm>
#include <cmath>

#include "jppnet/core/geometry.hpp"

namespace jpp::train {
namespace {

int draw_origin(Rng& rng, int size, int crop, bool random) {
  const int slack = size - crop;
  if (!random) return slack / 2;  // negative slack centres the padding
  return slack >= 0 ? rng.uniform_int(0, slack) : rng.uniform_int(slack, 0);
}

}  // namespace

AugmentParams draw_augment(Rng& rng, int height, int width, const AugmentConfig& cfg) {
  AugmentParams p;
  if (cfg.enabled) p.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  const int h = std::max(1, static_cast<int>(std::lround(height * p.scale)));
  const int w = std::max(1, static_cast<int>(std::lround(width * p.scale)));
  p.x0 = draw_origin(rng, w, cfg.crop_size, cfg.enabled);
  p.y0 = draw_origin(rng, h, cfg.crop_size, cfg.enabled);
  p.flip = cfg.enabled && rng.bernoulli(cfg.flip_prob);
  return p;
}

synthgen::SampleRecord apply_augment(const synthgen::SampleRecord& sample,
                                     const AugmentParams& params, int crop_size) {
  const int h0 = sample.image.height();
  const int w0 = sample.image.width();
  const int h = std::max(1, static_cast<int>(std::lround(h0 * params.scale)));
  const int w = std::max(1, static_cast<int>(std::lround(w0 * params.scale)));
  const double sx = static_cast<double>(w) / w0;
  const double sy = static_cast<double>(h) / h0;

  synthgen::SampleRecord out;
  out.id = sample.id;
  out.factors = sample.factors;
  const bool resized = h != h0 || w != w0;
  const RgbImage image = resized ? resize_image(sample.image, h, w) : sample.image;
  const LabelMap labels = resized ? resize_label_map(sample.labels, h, w) : sample.labels;
  // Pixel centres map as (x + 0.5) * s - 0.5 under both resamplers.
  const JointSet scaled = scale_joint_set(sample.joints, sx, sy);
  out.image = crop_image(image, params.x0, params.y0, crop_size, crop_size, kPadColor);
  out.labels = crop_label_map(labels, params.x0, params.y0, crop_size, crop_size,
                              static_cast<std::uint8_t>(Part::kBackground));
  out.joints = crop_joint_set(scaled, params.x0 - 0.5 * (sx - 1.0), params.y0 - 0.5 * (sy - 1.0),
                              crop_size, crop_size);
  if (params.flip) {
    out.image = flip_image(out.image);
    out.labels = flip_label_map(out.labels);
    out.joints = flip_joint_set(out.joints, crop_size);
  }
  return out;
}

synthgen::SampleRecord augment(const synthgen::SampleRecord& sample, Rng& rng,
                               const AugmentConfig& cfg) {
  const AugmentParams p = draw_augment(rng, sample.image.height(), sample.image.width(), cfg);
  return apply_augment(sample, p, cfg.crop_size);
}

}  // namespace jpp::train
