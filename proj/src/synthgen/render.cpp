// SPDX-License-Identifier: Apache-2.0
#include "jppnet/synthgen/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace jpp::synthgen {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a) { return std::sqrt(dot(a, a)); }
Point2 unit(Point2 a) {
  const double n = norm(a);
  return n > 0 ? (1.0 / n) * a : Point2{0.0, -1.0};
}

/// Labelled region. measure() returns the normalised distance to the shape
/// (<= 1 means the pixel is covered).
struct Shape {
  std::uint8_t label = 0;
  bool polygon = false;
  Point2 a, b;
  double radius = 1.0;
  std::vector<Point2> corners;
  bool clipped = false;
  Point2 origin, axis;
  double tmin = -kInf, tmax = kInf;

  double measure(Point2 p) const {
    if (clipped) {
      const double t = dot(p - origin, axis);
      if (t < tmin || t > tmax) return kInf;
    }
    if (polygon) {
      int pos = 0, neg = 0;
      for (std::size_t i = 0; i < corners.size(); ++i) {
        const Point2& c0 = corners[i];
        const Point2& c1 = corners[(i + 1) % corners.size()];
        const double s = cross(c1 - c0, p - c0);
        pos += s >= 0 ? 1 : 0;
        neg += s <= 0 ? 1 : 0;
      }
      const auto n = static_cast<int>(corners.size());
      return (pos == n || neg == n) ? 0.0 : kInf;
    }
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (a + t * ab)) / radius;
  }
};

Shape capsule(Point2 a, Point2 b, double r, Part label) {
  Shape s;
  s.label = static_cast<std::uint8_t>(label);
  s.a = a;
  s.b = b;
  s.radius = r;
  return s;
}

Shape disk_band(Point2 center, double r, Point2 axis, double tmin, double tmax, Part label) {
  Shape s = capsule(center, center, r, label);
  s.clipped = true;
  s.origin = center;
  s.axis = axis;
  s.tmin = tmin;
  s.tmax = tmax;
  return s;
}

Shape quad(std::vector<Point2> corners, Part label) {
  Shape s;
  s.label = static_cast<std::uint8_t>(label);
  s.polygon = true;
  s.corners = std::move(corners);
  return s;
}

using Layer = std::vector<Shape>;

const std::array<Rgb, kNumPartClasses> kPalette = {{
    {0, 0, 0},       {200, 40, 40},   {60, 40, 20},    {250, 240, 90},  {20, 20, 20},
    {40, 90, 200},   {200, 60, 160},  {120, 120, 60},  {240, 240, 240}, {30, 50, 90},
    {90, 160, 90},   {230, 120, 20},  {150, 30, 80},   {235, 190, 160}, {228, 184, 154},
    {202, 158, 128}, {228, 184, 154}, {202, 158, 128}, {95, 62, 40},    {70, 45, 30},
}};

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Rgb jitter(Rng& rng, Rgb c, double amount) {
  return {clamp_byte(c.r + rng.uniform(-amount, amount)),
          clamp_byte(c.g + rng.uniform(-amount, amount)),
          clamp_byte(c.b + rng.uniform(-amount, amount))};
}

Rgb shift(Rgb c, double d) { return {clamp_byte(c.r + d), clamp_byte(c.g + d), clamp_byte(c.b + d)}; }

int pixel_noise(std::uint64_t seed, int x, int y) {
  const std::uint64_t h =
      mix_seed(seed ^ (static_cast<std::uint64_t>(y) << 32 | static_cast<std::uint32_t>(x)));
  return static_cast<int>(h & 15U) - 8;
}

Point2 pos(const SampledSkeleton& s, Joint j) { return s.positions[index_of(j)]; }

struct Side {
  Joint hip, knee, ankle, shoulder, elbow, wrist;
  Part leg, arm, shoe;
};

constexpr std::array<Side, 2> kSides = {{
    {Joint::kRHip, Joint::kRKnee, Joint::kRAnkle, Joint::kRShoulder, Joint::kRElbow,
     Joint::kRWrist, Part::kRightLeg, Part::kRightArm, Part::kRightShoe},
    {Joint::kLHip, Joint::kLKnee, Joint::kLAnkle, Joint::kLShoulder, Joint::kLElbow,
     Joint::kLWrist, Part::kLeftLeg, Part::kLeftArm, Part::kLeftShoe},
}};

std::vector<Layer> build_layers(const SampledSkeleton& s, const RenderStyle& st) {
  std::vector<Layer> layers;
  const Point2 pelvis = pos(s, Joint::kPelvis);
  const Point2 thorax = pos(s, Joint::kThorax);
  const Point2 neck = pos(s, Joint::kUpperNeck);
  const Point2 top = pos(s, Joint::kHeadTop);
  const Point2 body_down = unit(pelvis - thorax);

  Layer legs, socks, shoes, lower, torso, neck_layer, arms, scarf;
  for (const Side& side : kSides) {
    const Point2 hip = pos(s, side.hip), knee = pos(s, side.knee), ankle = pos(s, side.ankle);
    legs.push_back(capsule(hip, knee, st.leg_radius, side.leg));
    legs.push_back(capsule(knee, ankle, 0.9 * st.leg_radius, side.leg));
    if (st.socks) {
      socks.push_back(capsule(ankle, ankle + 0.3 * (knee - ankle), 0.95 * st.leg_radius,
                              Part::kSocks));
    }
    // The shoe starts just below the ankle and points away from the body midline.
    const Point2 shin = unit(ankle - knee);
    const Point2 outward = unit(hip - pelvis);
    const Point2 heel = ankle + (0.6 * st.foot_radius) * shin;
    const Point2 toe = heel + st.foot_length * unit(shin + 0.8 * outward);
    shoes.push_back(capsule(heel, toe, st.foot_radius, side.shoe));
  }

  const Point2 rhip = pos(s, Joint::kRHip), lhip = pos(s, Joint::kLHip);
  const Point2 rknee = pos(s, Joint::kRKnee), lknee = pos(s, Joint::kLKnee);
  const bool dress = st.torso == TorsoGarment::kDress;
  const bool jumpsuit = st.torso == TorsoGarment::kJumpsuit;
  if (dress || (!jumpsuit && st.lower == LowerGarment::kSkirt)) {
    const Point2 out_r = unit(rhip - lhip), out_l = unit(lhip - rhip);
    const double w = st.leg_radius;
    const Point2 up = -1.0 * body_down;
    lower.push_back(quad({rhip + w * out_r + w * up, lhip + w * out_l + w * up,
                          lhip + 0.75 * (lknee - lhip) + 2.0 * w * out_l,
                          rhip + 0.75 * (rknee - rhip) + 2.0 * w * out_r},
                         dress ? Part::kDress : Part::kSkirt));
  } else {
    const Part label = jumpsuit ? Part::kJumpsuit : Part::kPants;
    const double r = 1.2 * st.leg_radius;
    lower.push_back(capsule(rhip, rhip + 0.95 * (rknee - rhip), r, label));
    lower.push_back(capsule(lhip, lhip + 0.95 * (lknee - lhip), r, label));
    lower.push_back(capsule(rhip, lhip, r, label));
  }

  Part torso_label = Part::kUpperClothes;
  switch (st.torso) {
    case TorsoGarment::kUpperClothes: torso_label = Part::kUpperClothes; break;
    case TorsoGarment::kCoat: torso_label = Part::kCoat; break;
    case TorsoGarment::kDress: torso_label = Part::kDress; break;
    case TorsoGarment::kJumpsuit: torso_label = Part::kJumpsuit; break;
  }
  torso.push_back(capsule(pelvis, thorax, st.torso_radius, torso_label));
  torso.push_back(capsule(pos(s, Joint::kRShoulder), pos(s, Joint::kLShoulder),
                          1.3 * st.arm_radius, torso_label));
  neck_layer.push_back(capsule(thorax, neck, 1.1 * st.arm_radius, Part::kFace));

  for (const Side& side : kSides) {
    const Point2 sh = pos(s, side.shoulder), el = pos(s, side.elbow), wr = pos(s, side.wrist);
    arms.push_back(capsule(sh, el, st.arm_radius, side.arm));
    arms.push_back(capsule(el, wr, 0.9 * st.arm_radius, side.arm));
    arms.push_back(capsule(wr, wr + 0.3 * (wr - el), st.hand_radius,
                           st.gloves ? Part::kGloves : side.arm));
  }
  if (st.scarf) scarf.push_back(capsule(thorax, neck, 1.6 * st.arm_radius, Part::kScarf));

  layers.push_back(std::move(legs));
  layers.push_back(std::move(socks));
  layers.push_back(std::move(shoes));
  layers.push_back(std::move(lower));
  layers.push_back(std::move(torso));
  layers.push_back(std::move(neck_layer));
  layers.push_back(std::move(arms));
  layers.push_back(std::move(scarf));

  const double head_len = norm(top - neck);
  const Point2 axis = unit(top - neck);
  const Point2 center = neck + (0.5 * head_len) * axis;
  const double r = 0.55 * head_len;
  const Part face = s.back_view ? Part::kHair : Part::kFace;
  layers.push_back({capsule(center, center, r, face)});
  layers.push_back({disk_band(center, 1.08 * r, axis, 0.15 * r, kInf, Part::kHair)});
  if (st.sunglasses && !s.back_view) {
    layers.push_back({disk_band(center, 0.92 * r, axis, -0.2 * r, 0.14 * r, Part::kSunglasses)});
  }
  if (st.hat) layers.push_back({disk_band(center, 1.2 * r, axis, 0.5 * r, kInf, Part::kHat)});
  return layers;
}

}  // namespace

RenderStyle RenderStyle::sample(Rng& rng, const SampledSkeleton& skeleton, Canvas canvas,
                                const StyleOptions& options) {
  RenderStyle st;
  const double b = skeleton.body_height;
  st.torso_radius = 0.085 * b;
  st.arm_radius = 0.042 * b;
  st.leg_radius = 0.052 * b;
  st.hand_radius = 0.036 * b;
  st.foot_radius = 0.036 * b;
  st.foot_length = 0.07 * b;

  const double skin = rng.uniform(-35.0, 20.0);
  for (int i = 0; i < kNumPartClasses; ++i) st.colors[i] = jitter(rng, kPalette[i], 40.0);
  for (Part p : {Part::kFace, Part::kLeftArm, Part::kRightArm, Part::kLeftLeg, Part::kRightLeg}) {
    st.colors[index_of(p)] = shift(kPalette[index_of(p)], skin);
  }
  const double shoe = rng.uniform(-30.0, 60.0);
  st.colors[index_of(Part::kLeftShoe)] = shift(kPalette[index_of(Part::kLeftShoe)], shoe);
  st.colors[index_of(Part::kRightShoe)] = shift(kPalette[index_of(Part::kRightShoe)], shoe);
  st.texture_seed = rng.next();

  const double garment = rng.uniform();
  if (garment < options.dress_prob) {
    st.torso = TorsoGarment::kDress;
  } else if (garment < options.dress_prob + options.jumpsuit_prob) {
    st.torso = TorsoGarment::kJumpsuit;
  } else if (garment < options.dress_prob + options.jumpsuit_prob + options.coat_prob) {
    st.torso = TorsoGarment::kCoat;
  }
  st.lower = rng.bernoulli(options.skirt_prob) ? LowerGarment::kSkirt : LowerGarment::kPants;
  st.hat = rng.bernoulli(options.hat_prob);
  st.sunglasses = rng.bernoulli(options.small_part_prob);
  st.gloves = rng.bernoulli(options.small_part_prob);
  st.socks = rng.bernoulli(options.small_part_prob);
  st.scarf = rng.bernoulli(options.small_part_prob);

  st.occluder_min = options.occluder_min;
  st.occluder_max = options.occluder_max;
  if (rng.bernoulli(options.occlusion_prob) && options.occluder_max > 0) {
    std::vector<int> present;
    for (int j = 0; j < kNumJoints; ++j) {
      if (skeleton.joints[j].present()) present.push_back(j);
    }
    const int count = rng.uniform_int(std::max(options.occluder_min, 1), options.occluder_max);
    for (int k = 0; k < count && !present.empty(); ++k) {
      const Point2 c = skeleton.joints[present[rng.uniform_int(0, static_cast<int>(present.size()) - 1)]].point();
      const double w = rng.uniform(0.12, 0.3) * b;
      const double h = rng.uniform(0.12, 0.3) * b;
      const double cx = c.x + rng.uniform(-0.25, 0.25) * w;
      const double cy = c.y + rng.uniform(-0.25, 0.25) * h;
      st.occluders.push_back({std::max(0.0, cx - w / 2), std::max(0.0, cy - h / 2),
                              std::min(canvas.width - 1.0, cx + w / 2),
                              std::min(canvas.height - 1.0, cy + h / 2)});
      st.occluder_colors.push_back(
          {clamp_byte(rng.uniform(0, 255)), clamp_byte(rng.uniform(0, 255)),
           clamp_byte(rng.uniform(0, 255))});
    }
  }
  return st;
}

RenderStyle RenderStyle::with_sides_swapped() const {
  RenderStyle out = *this;
  for (int i = 0; i < kNumPartClasses; ++i) out.colors[part_swap(i)] = colors[i];
  return out;
}

Rendering rasterize_person(const SampledSkeleton& skeleton, const RenderStyle& style,
                           Canvas canvas) {
  const RenderStyle palette = skeleton.back_view ? style.with_sides_swapped() : style;
  const std::vector<Layer> layers = build_layers(skeleton, style);

  const int h = canvas.height, w = canvas.width;
  LabelMap labels(h, w);
  std::vector<double> shade(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0);
  for (const Layer& layer : layers) {
    if (layer.empty()) continue;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Point2 p{static_cast<double>(x), static_cast<double>(y)};
        double best = kInf;
        const Shape* winner = nullptr;
        for (const Shape& s : layer) {
          const double m = s.measure(p);
          if (m < best) {
            best = m;
            winner = &s;
          }
        }
        if (winner != nullptr && best <= 1.0) {
          labels.set(y, x, winner->label);
          shade[static_cast<std::size_t>(y) * w + x] = best;
        }
      }
    }
  }

  // Background: two interfering stripes plus per-pixel noise.
  Rng bg(style.texture_seed);
  const Rgb bg0 = jitter(bg, {120, 120, 120}, 70.0);
  const Rgb bg1 = jitter(bg, {160, 150, 130}, 70.0);
  const double f1 = bg.uniform(0.02, 0.15), f2 = bg.uniform(0.02, 0.15);
  const double a1 = bg.uniform(0.0, 6.3), a2 = bg.uniform(0.0, 6.3);
  const double phase = bg.uniform(0.0, 6.3);

  RgbImage image(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int n = pixel_noise(style.texture_seed, x, y);
      const std::uint8_t label = labels.at(y, x);
      if (label == 0) {
        const double v = 0.5 + 0.25 * std::sin(f1 * (x * std::cos(a1) + y * std::sin(a1)) + phase) +
                         0.25 * std::sin(f2 * (x * std::cos(a2) + y * std::sin(a2)));
        image.set(y, x,
                  {clamp_byte(bg0.r + v * (bg1.r - bg0.r) + n),
                   clamp_byte(bg0.g + v * (bg1.g - bg0.g) + n),
                   clamp_byte(bg0.b + v * (bg1.b - bg0.b) + n)});
      } else {
        const double d = shade[static_cast<std::size_t>(y) * w + x];
        const double k = 1.0 - 0.25 * d * d;
        const Rgb c = palette.colors[label];
        image.set(y, x, {clamp_byte(c.r * k + n), clamp_byte(c.g * k + n), clamp_byte(c.b * k + n)});
      }
    }
  }

  JointSet joints = skeleton.joints;
  for (std::size_t k = 0; k < style.occluders.size(); ++k) {
    const Rect& r = style.occluders[k];
    const Rgb c = style.occluder_colors[k];
    for (int y = std::max(0, static_cast<int>(std::ceil(r.y0)));
         y <= std::min(h - 1, static_cast<int>(std::floor(r.y1))); ++y) {
      for (int x = std::max(0, static_cast<int>(std::ceil(r.x0)));
           x <= std::min(w - 1, static_cast<int>(std::floor(r.x1))); ++x) {
        labels.set(y, x, Part::kBackground);
        const int stripe = ((x + y) / 4) % 2 == 0 ? 0 : 30;
        image.set(y, x, {clamp_byte(c.r - stripe), clamp_byte(c.g - stripe), clamp_byte(c.b - stripe)});
      }
    }
    for (int j = 0; j < kNumJoints; ++j) {
      const JointRecord& rec = joints[j];
      if (rec.present() && r.contains(rec.point())) {
        joints.set(j, JointRecord::at(rec.x, rec.y, Visibility::kOccluded));
      }
    }
  }
  return {std::move(image), std::move(labels), joints};
}

}  // namespace jpp::synthgen
