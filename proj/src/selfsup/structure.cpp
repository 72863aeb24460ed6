// SPDX-License-Identifier: Apache-2.0
#include "jppnet/selfsup/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jppnet/core/errors.hpp"

namespace jpp::selfsup {

const MergeRule& MergeRule::standard() {
  static const MergeRule rule = [] {
    MergeRule r;
    auto set = [&r](PseudoJoint j, std::vector<Part> parts) {
      r.parts[static_cast<std::size_t>(index_of(j))] = std::move(parts);
    };
    set(PseudoJoint::kHead, {Part::kHat, Part::kHair, Part::kSunglasses, Part::kFace});
    set(PseudoJoint::kUpperBody, {Part::kUpperClothes, Part::kCoat, Part::kScarf});
    set(PseudoJoint::kLowerBody, {Part::kPants, Part::kSkirt});
    set(PseudoJoint::kLeftArm, {Part::kLeftArm});
    set(PseudoJoint::kRightArm, {Part::kRightArm});
    set(PseudoJoint::kLeftLeg, {Part::kLeftLeg});
    set(PseudoJoint::kRightLeg, {Part::kRightLeg});
    set(PseudoJoint::kLeftShoe, {Part::kLeftShoe});
    set(PseudoJoint::kRightShoe, {Part::kRightShoe});
    r.validate();
    return r;
  }();
  return rule;
}

void MergeRule::validate() const { (void)lookup(); }

std::array<int, kNumPartClasses> MergeRule::lookup() const {
  std::array<int, kNumPartClasses> table;
  table.fill(-1);
  for (int k = 0; k < kNumPseudoJoints; ++k) {
    for (Part p : parts[static_cast<std::size_t>(k)]) {
      int& slot = table[static_cast<std::size_t>(index_of(p))];
      if (slot != -1) {
        throw ConfigError("part class " + std::string(part_name(index_of(p))) +
                          " is merged into two pseudo-joint regions");
      }
      slot = k;
    }
  }
  return table;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

RegionMasks merge_parts(const LabelMap& m, const MergeRule& rule) {
  const auto table = rule.lookup();
  RegionMasks masks;
  for (BinaryMask& mask : masks) {
    mask.height = m.height();
    mask.width = m.width();
    mask.cells.assign(m.size(), 0);
  }
  const auto values = m.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int k = table[values[i]];
    if (k >= 0) masks[static_cast<std::size_t>(k)].cells[i] = 1;
  }
  return masks;
}

std::optional<Point2> region_center(const BinaryMask& mask) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return Point2{sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

PseudoCenters region_centers(const RegionMasks& masks) {
  PseudoCenters out;
  for (int k = 0; k < kNumPseudoJoints; ++k) out[k] = region_center(masks[k]);
  return out;
}

HeatmapStack render_gaussians(std::span<const std::optional<Point2>> centers, int height, int width,
                              double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("heatmap sigma must be positive");
  const int channels = static_cast<int>(centers.size());
  HeatmapStack stack(channels, height, width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> gx(static_cast<std::size_t>(width));
  for (int k = 0; k < channels; ++k) {
    if (!centers[k]) continue;
    const Point2 c = *centers[k];
    for (int x = 0; x < width; ++x) gx[x] = (x - c.x) * (x - c.x);
    for (int y = 0; y < height; ++y) {
      const double dy2 = (y - c.y) * (y - c.y);
      for (int x = 0; x < width; ++x) {
        stack.at(k, y, x) = static_cast<float>(std::exp(-(gx[x] + dy2) * inv));
      }
    }
  }
  return stack;
}

HeatmapStack render_pseudo_heatmaps(const PseudoCenters& centers, int height, int width,
                                    double sigma) {
  return render_gaussians(centers, height, width, sigma);
}

HeatmapStack pseudo_joints_from_parsing(const LabelMap& m, int height, int width, double sigma) {
  PseudoCenters centers = region_centers(merge_parts(m));
  if (m.height() > 0 && m.width() > 0) {
    const double sy = static_cast<double>(height) / m.height();
    const double sx = static_cast<double>(width) / m.width();
    for (auto& c : centers) {
      if (c) c = Point2{c->x * sx, c->y * sy};
    }
  }
  return render_pseudo_heatmaps(centers, height, width, sigma);
}

JointStructureLoss joint_structure_loss(const HeatmapStack& c_p, const HeatmapStack& c_gt) {
  if (!c_p.same_shape(c_gt)) throw ShapeError("pseudo-joint stacks differ in shape");
  if (c_gt.channels() != kNumPseudoJoints) {
    throw ShapeError("pseudo-joint stacks need " + std::to_string(kNumPseudoJoints) +
                     " channels, got " + std::to_string(c_gt.channels()));
  }
  JointStructureLoss out;
  double sum = 0.0;
  for (int k = 0; k < kNumPseudoJoints; ++k) {
    const auto p = c_p.channel(k);
    const auto g = c_gt.channel(k);
    bool present = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = static_cast<double>(p[i]) - static_cast<double>(g[i]);
      sum += d * d;
      present |= g[i] != 0.0F;
    }
    out.n_present += present;
  }
  if (out.n_present > 0) out.l_joint = sum / (2.0 * out.n_present);
  return out;
}

double structure_sensitive_loss(double l_joint, double l_parsing) {
  if (l_joint < 0.0 || l_parsing < 0.0) {
    throw Error("structure-sensitive loss needs non-negative inputs");
  }
  return l_joint * l_parsing;
}

StructureLossReport structure_report(const LabelMap& predicted, const LabelMap& ground_truth,
                                     double l_parsing, double sigma) {
  if (predicted.height() != ground_truth.height() || predicted.width() != ground_truth.width()) {
    throw ShapeError("predicted and ground-truth parsing differ in size");
  }
  const int h = predicted.height(), w = predicted.width();
  const auto js = joint_structure_loss(pseudo_joints_from_parsing(predicted, h, w, sigma),
                                       pseudo_joints_from_parsing(ground_truth, h, w, sigma));
  StructureLossReport r;
  r.l_joint = js.l_joint;
  r.n_present = js.n_present;
  r.l_parsing = l_parsing;
  r.l_structure = structure_sensitive_loss(js.l_joint, l_parsing);
  return r;
}

io::GrayImage heatmap_grid(const HeatmapStack& stack) {
  const int h = stack.height(), w = stack.width();
  io::GrayImage img;
  img.height = 3 * h + 2;
  img.width = 3 * w + 2;
  img.values.assign(static_cast<std::size_t>(img.height) * img.width, 128);
  for (int k = 0; k < std::min(stack.channels(), 9); ++k) {
    const int oy = (k / 3) * (h + 1), ox = (k % 3) * (w + 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float v = std::clamp(stack.at(k, y, x), 0.0F, 1.0F);
        img.values[static_cast<std::size_t>(oy + y) * img.width + (ox + x)] =
            static_cast<std::uint8_t>(std::lround(255.0F * v));
      }
    }
  }
  return img;
}

}  // namespace jpp::selfsup
