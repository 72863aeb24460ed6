// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "jppnet/core/taxonomy.hpp"

namespace jpp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class Visibility : std::uint8_t { kAbsent = 0, kOccluded = 1, kVisible = 2 };

struct JointRecord {
  static constexpr double kAbsentCoordinate = -1.0;

  double x = kAbsentCoordinate;
  double y = kAbsentCoordinate;
  Visibility visibility = Visibility::kAbsent;

  bool present() const { return visibility != Visibility::kAbsent; }
  Point2 point() const { return {x, y}; }

  static JointRecord absent() { return {}; }
  static JointRecord at(double x, double y, Visibility v = Visibility::kVisible);

  friend bool operator==(const JointRecord&, const JointRecord&) = default;
};

/// The 16 MPII joints of one person. Absent joints keep the sentinel
/// coordinates (-1, -1).
class JointSet {
 public:
  JointSet() = default;

  const JointRecord& operator[](int joint) const { return joints_[static_cast<std::size_t>(joint)]; }
  const JointRecord& operator[](Joint joint) const { return (*this)[index_of(joint)]; }

  void set(int joint, JointRecord record);
  void set(Joint joint, JointRecord record) { set(index_of(joint), record); }
  void mark_absent(int joint) { set(joint, JointRecord::absent()); }

  int count_present() const;

  const std::array<JointRecord, kNumJoints>& records() const { return joints_; }

  friend bool operator==(const JointSet&, const JointSet&) = default;

 private:
  std::array<JointRecord, kNumJoints> joints_{};
};

/// Per-pixel parsing classes, row-major. Every cell holds a valid class index.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, std::uint8_t fill = 0);

  /// Validates every value; throws DataError on an out-of-range class.
  static LabelMap from_values(int height, int width, std::vector<std::uint8_t> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  std::uint8_t at(int y, int x) const { return cells_[index(y, x)]; }
  void set(int y, int x, std::uint8_t label);
  void set(int y, int x, Part part) { set(y, x, static_cast<std::uint8_t>(part)); }

  std::span<const std::uint8_t> values() const { return cells_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// K dense non-negative maps of size height x width, channel-major.
class HeatmapStack {
 public:
  HeatmapStack() = default;
  HeatmapStack(int channels, int height, int width, float fill = 0.0F);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  float at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  float& at(int c, int y, int x) { return values_[index(c, y, x)]; }

  std::span<const float> channel(int c) const {
    return {values_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<float> channel(int c) {
    return {values_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool same_shape(const HeatmapStack& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB image.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int height, int width, Rgb fill = {});

  int height() const { return height_; }
  int width() const { return width_; }

  Rgb at(int y, int x) const {
    const std::size_t i = index(y, x);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int y, int x, Rgb c) {
    const std::size_t i = index(y, x);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const { return pixels_; }
  std::span<std::uint8_t> bytes() { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int y, int x) const {
    return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x));
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace jpp
