// SPDX-License-Identifier: Apache-2.0
#include "jppnet/synthgen/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/geometry.hpp"

namespace jpp::synthgen {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2;

double round_centi(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

SkeletonSpec SkeletonSpec::standard(Canvas canvas) {
  // Segment lengths as fractions of the nominal body height.
  const double b = 0.85 * canvas.height;
  auto range = [b](double frac) { return std::pair{0.85 * frac * b, 1.15 * frac * b}; };

  SkeletonSpec spec;
  spec.nominal_body_height = b;
  auto add = [&spec, &range](Joint parent, Joint child, double frac, double amin, double amax) {
    const auto [lo, hi] = range(frac);
    spec.bones.push_back({parent, child, lo, hi, amin, amax});
  };
  // Subject's right side sits on the image left in the front view.
  add(Joint::kPelvis, Joint::kThorax, 0.30, -0.12, 0.12);
  add(Joint::kThorax, Joint::kUpperNeck, 0.07, -0.12, 0.12);
  add(Joint::kUpperNeck, Joint::kHeadTop, 0.14, -0.2, 0.2);
  add(Joint::kThorax, Joint::kRShoulder, 0.10, -kHalfPi - 0.1, -kHalfPi + 0.1);
  add(Joint::kThorax, Joint::kLShoulder, 0.10, kHalfPi - 0.1, kHalfPi + 0.1);
  add(Joint::kRShoulder, Joint::kRElbow, 0.16, -kHalfPi - 0.25, -kHalfPi + 1.2);
  add(Joint::kLShoulder, Joint::kLElbow, 0.16, kHalfPi - 1.2, kHalfPi + 0.25);
  add(Joint::kRElbow, Joint::kRWrist, 0.14, -0.6, 0.8);
  add(Joint::kLElbow, Joint::kLWrist, 0.14, -0.8, 0.6);
  add(Joint::kPelvis, Joint::kRHip, 0.07, -kHalfPi - 0.05, -kHalfPi + 0.05);
  add(Joint::kPelvis, Joint::kLHip, 0.07, kHalfPi - 0.05, kHalfPi + 0.05);
  add(Joint::kRHip, Joint::kRKnee, 0.22, -kHalfPi - 0.15, -kHalfPi + 0.35);
  add(Joint::kLHip, Joint::kLKnee, 0.22, kHalfPi - 0.35, kHalfPi + 0.15);
  add(Joint::kRKnee, Joint::kRAnkle, 0.22, -0.25, 0.25);
  add(Joint::kLKnee, Joint::kLAnkle, 0.22, -0.25, 0.25);
  return spec;
}

void SkeletonSpec::validate() const {
  std::array<bool, kNumJoints> reached{};
  reached[index_of(Joint::kPelvis)] = true;
  for (const BoneSpec& bone : bones) {
    if (!reached[index_of(bone.parent)]) {
      throw GenerationError("bone parent " + std::string(joint_name(index_of(bone.parent))) +
                            " is not connected to the pelvis");
    }
    if (reached[index_of(bone.child)]) {
      throw GenerationError("joint " + std::string(joint_name(index_of(bone.child))) +
                            " has more than one parent");
    }
    if (!(bone.length_min > 0.0) || bone.length_max < bone.length_min ||
        bone.angle_max < bone.angle_min) {
      throw GenerationError("invalid bone range for " +
                            std::string(joint_name(index_of(bone.child))));
    }
    reached[index_of(bone.child)] = true;
  }
  if (std::find(reached.begin(), reached.end(), false) != reached.end()) {
    throw GenerationError("skeleton does not cover all 16 joints");
  }
}

JointSet clip_to_canvas(const std::array<Point2, kNumJoints>& positions, Canvas canvas) {
  JointSet joints;
  for (int i = 0; i < kNumJoints; ++i) {
    const Point2& p = positions[i];
    if (inside(p, canvas.height, canvas.width)) joints.set(i, JointRecord::at(p.x, p.y));
  }
  return joints;
}

SampledSkeleton sample_skeleton(Rng& rng, Canvas canvas, const SkeletonSpec& spec) {
  spec.validate();
  if (canvas.height < 16 || canvas.width < 16) {
    throw GenerationError("canvas too small for a skeleton: " + std::to_string(canvas.height) +
                          "x" + std::to_string(canvas.width));
  }
  const TorsoAnchor& anchor = spec.anchor;
  for (int attempt = 0; attempt < kSkeletonRetries; ++attempt) {
    std::array<Point2, kNumJoints> rel{};
    std::array<double, kNumJoints> dir{};
    const double size = rng.uniform();
    const double up = -kHalfPi + rng.uniform(-anchor.tilt_max, anchor.tilt_max);
    for (const BoneSpec& bone : spec.bones) {
      const double parent_dir = bone.parent == Joint::kPelvis ? up : dir[index_of(bone.parent)];
      const double angle = parent_dir + rng.uniform(bone.angle_min, bone.angle_max);
      const double t = std::clamp(size + rng.normal(0.0, 0.08), 0.0, 1.0);
      const double length = bone.length_min + (bone.length_max - bone.length_min) * t;
      const Point2& from = rel[index_of(bone.parent)];
      rel[index_of(bone.child)] = {from.x + length * std::cos(angle),
                                   from.y + length * std::sin(angle)};
      dir[index_of(bone.child)] = angle;
    }

    const bool back_view = rng.bernoulli(anchor.back_view_prob);
    if (back_view) {
      for (Point2& p : rel) p.x = -p.x;
    }

    double min_y = rel[0].y, max_y = rel[0].y;
    for (const Point2& p : rel) {
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const double h = canvas.height;
    const double w = canvas.width;
    const double pelvis_x = w * anchor.center_x + anchor.jitter * w * rng.uniform(-1.0, 1.0);
    double pelvis_y = 0.0;
    const double mode = rng.uniform();
    const double neck_rise = -rel[index_of(Joint::kUpperNeck)].y;
    const double knee_drop = std::min(rel[index_of(Joint::kRKnee)].y,
                                      rel[index_of(Joint::kLKnee)].y);
    if (mode < anchor.truncate_top_prob && neck_rise > 1.0) {
      pelvis_y = rng.uniform(0.35, 0.95) * neck_rise;
    } else if (mode < anchor.truncate_top_prob + anchor.truncate_bottom_prob && knee_drop > 1.0) {
      pelvis_y = rng.uniform(h - knee_drop + 1.0, h - 0.4 * knee_drop);
    } else {
      pelvis_y = h * anchor.center_y - 0.5 * (min_y + max_y) +
                 anchor.jitter * h * rng.uniform(-1.0, 1.0);
    }

    SampledSkeleton out;
    for (int i = 0; i < kNumJoints; ++i) {
      out.positions[i] = {round_centi(pelvis_x + rel[i].x), round_centi(pelvis_y + rel[i].y)};
    }
    out.joints = clip_to_canvas(out.positions, canvas);
    out.back_view = back_view;
    const Point2& pelvis = out.positions[index_of(Joint::kPelvis)];
    const Point2& thorax = out.positions[index_of(Joint::kThorax)];
    out.body_height = std::hypot(thorax.x - pelvis.x, thorax.y - pelvis.y) / 0.30;
    if (out.joints.count_present() >= kMinJointsInCanvas) return out;
  }
  throw GenerationError("fewer than " + std::to_string(kMinJointsInCanvas) +
                        " joints inside the canvas after " + std::to_string(kSkeletonRetries) +
                        " attempts");
}

SampledSkeleton translate(const SampledSkeleton& s, double dx, double dy, Canvas canvas) {
  SampledSkeleton out = s;
  for (Point2& p : out.positions) p = {round_centi(p.x + dx), round_centi(p.y + dy)};
  out.joints = clip_to_canvas(out.positions, canvas);
  return out;
}

SampledSkeleton mirror(const SampledSkeleton& s, Canvas canvas) {
  SampledSkeleton out = s;
  for (int i = 0; i < kNumJoints; ++i) {
    const Point2& p = s.positions[i];
    out.positions[joint_swap(i)] = {canvas.width - 1 - p.x, p.y};
  }
  out.joints = flip_joint_set(s.joints, canvas.width);
  return out;
}

}  // namespace jpp::synthgen
