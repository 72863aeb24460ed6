// SPDX-License-Identifier: Apache-2.0
#include "jppnet/core/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "jppnet/core/errors.hpp"

namespace jpp {
namespace {

void require_positive(int height, int width) {
  if (height < 1 || width < 1) throw ShapeError("resize target must be at least 1x1");
}

int nearest_source(int i, int src, int dst) {
  const auto s = static_cast<int>(std::floor((i + 0.5) * src / static_cast<double>(dst)));
  return std::clamp(s, 0, src - 1);
}

using Tap = BilinearTap;

}  // namespace

BilinearTap bilinear_tap(int i, int src, int dst, Alignment alignment) {
  const double scale = src / static_cast<double>(dst);
  double s = alignment == Alignment::kHalfPixel ? (i + 0.5) * scale - 0.5 : i * scale;
  s = std::clamp(s, 0.0, static_cast<double>(src - 1));
  const int lo = static_cast<int>(std::floor(s));
  const int hi = std::min(lo + 1, src - 1);
  return {lo, hi, s - lo};
}

LabelMap flip_label_map(const LabelMap& m) {
  const auto& swap = part_swap_table();
  LabelMap out(m.height(), m.width());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      out.set(y, m.width() - 1 - x, swap[m.at(y, x)]);
    }
  }
  return out;
}

JointSet flip_joint_set(const JointSet& j, int width) {
  if (width <= 0) throw ShapeError("flip width must be positive");
  JointSet out;
  for (int i = 0; i < kNumJoints; ++i) {
    const JointRecord& r = j[i];
    if (!r.present()) continue;
    out.set(joint_swap(i), JointRecord::at(width - 1 - r.x, r.y, r.visibility));
  }
  return out;
}

RgbImage flip_image(const RgbImage& image) {
  RgbImage out(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.set(y, image.width() - 1 - x, image.at(y, x));
    }
  }
  return out;
}

HeatmapStack flip_heatmaps(const HeatmapStack& s, bool swap_joint_channels) {
  if (swap_joint_channels && s.channels() != kNumJoints) {
    throw ShapeError("joint channel swap requires 16 channels");
  }
  HeatmapStack out(s.channels(), s.height(), s.width());
  for (int c = 0; c < s.channels(); ++c) {
    const int dst = swap_joint_channels ? joint_swap(c) : c;
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) {
        out.at(dst, y, s.width() - 1 - x) = s.at(c, y, x);
      }
    }
  }
  return out;
}

HeatmapStack flip_class_scores(const HeatmapStack& s) {
  if (s.channels() != kNumPartClasses) throw ShapeError("class swap requires 20 channels");
  HeatmapStack out(s.channels(), s.height(), s.width());
  for (int c = 0; c < s.channels(); ++c) {
    const int dst = part_swap(c);
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) out.at(dst, y, s.width() - 1 - x) = s.at(c, y, x);
    }
  }
  return out;
}

LabelMap resize_label_map(const LabelMap& m, int height, int width) {
  require_positive(height, width);
  if (m.empty()) throw ShapeError("cannot resize an empty label map");
  LabelMap out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = nearest_source(y, m.height(), height);
    for (int x = 0; x < width; ++x) {
      out.set(y, x, m.at(sy, nearest_source(x, m.width(), width)));
    }
  }
  return out;
}

HeatmapStack resize_heatmaps(const HeatmapStack& s, int height, int width,
                             Alignment alignment) {
  require_positive(height, width);
  if (s.height() < 1 || s.width() < 1) throw ShapeError("cannot resize an empty heatmap");
  HeatmapStack out(s.channels(), height, width);
  std::vector<Tap> xs(static_cast<std::size_t>(width));
  for (int x = 0; x < width; ++x) xs[x] = bilinear_tap(x, s.width(), width, alignment);
  for (int y = 0; y < height; ++y) {
    const Tap ty = bilinear_tap(y, s.height(), height, alignment);
    for (int c = 0; c < s.channels(); ++c) {
      for (int x = 0; x < width; ++x) {
        const Tap& tx = xs[x];
        const double top = s.at(c, ty.lo, tx.lo) * (1 - tx.frac) + s.at(c, ty.lo, tx.hi) * tx.frac;
        const double bot = s.at(c, ty.hi, tx.lo) * (1 - tx.frac) + s.at(c, ty.hi, tx.hi) * tx.frac;
        out.at(c, y, x) = static_cast<float>(top * (1 - ty.frac) + bot * ty.frac);
      }
    }
  }
  return out;
}

RgbImage resize_image(const RgbImage& image, int height, int width) {
  require_positive(height, width);
  RgbImage out(height, width);
  for (int y = 0; y < height; ++y) {
    const Tap ty = bilinear_tap(y, image.height(), height, Alignment::kHalfPixel);
    for (int x = 0; x < width; ++x) {
      const Tap tx = bilinear_tap(x, image.width(), width, Alignment::kHalfPixel);
      const Rgb a = image.at(ty.lo, tx.lo), b = image.at(ty.lo, tx.hi);
      const Rgb c = image.at(ty.hi, tx.lo), d = image.at(ty.hi, tx.hi);
      auto mix = [&](double va, double vb, double vc, double vd) {
        const double v = (va * (1 - tx.frac) + vb * tx.frac) * (1 - ty.frac) +
                         (vc * (1 - tx.frac) + vd * tx.frac) * ty.frac;
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      };
      out.set(y, x, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

JointSet scale_joint_set(const JointSet& j, double sx, double sy) {
  JointSet out;
  for (int i = 0; i < kNumJoints; ++i) {
    const JointRecord& r = j[i];
    if (r.present()) out.set(i, JointRecord::at(r.x * sx, r.y * sy, r.visibility));
  }
  return out;
}

bool inside(const Point2& p, int height, int width) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1.0 && p.y <= height - 1.0;
}

JointSet crop_joint_set(const JointSet& j, double x0, double y0, int height, int width) {
  JointSet out;
  for (int i = 0; i < kNumJoints; ++i) {
    const JointRecord& r = j[i];
    if (!r.present()) continue;
    const Point2 p{r.x - x0, r.y - y0};
    if (inside(p, height, width)) out.set(i, JointRecord::at(p.x, p.y, r.visibility));
  }
  return out;
}

LabelMap crop_label_map(const LabelMap& m, int x0, int y0, int height, int width,
                        std::uint8_t fill) {
  LabelMap out(height, width, fill);
  for (int y = 0; y < height; ++y) {
    const int sy = y + y0;
    if (sy < 0 || sy >= m.height()) continue;
    for (int x = 0; x < width; ++x) {
      const int sx = x + x0;
      if (sx >= 0 && sx < m.width()) out.set(y, x, m.at(sy, sx));
    }
  }
  return out;
}

RgbImage crop_image(const RgbImage& image, int x0, int y0, int height, int width, Rgb fill) {
  RgbImage out(height, width, fill);
  for (int y = 0; y < height; ++y) {
    const int sy = y + y0;
    if (sy < 0 || sy >= image.height()) continue;
    for (int x = 0; x < width; ++x) {
      const int sx = x + x0;
      if (sx >= 0 && sx < image.width()) out.set(y, x, image.at(sy, sx));
    }
  }
  return out;
}

}  // namespace jpp
