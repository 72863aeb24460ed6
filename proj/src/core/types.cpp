// SPDX-License-Identifier: Apache-2.0
#include "jppnet/core/types.hpp"

#include <string>

#include "jppnet/core/errors.hpp"

namespace jpp {

JointRecord JointRecord::at(double x, double y, Visibility v) {
  if (v == Visibility::kAbsent) return absent();
  return {x, y, v};
}

void JointSet::set(int joint, JointRecord record) {
  if (joint < 0 || joint >= kNumJoints) {
    throw std::out_of_range("joint index out of range: " + std::to_string(joint));
  }
  if (!record.present()) record = JointRecord::absent();
  joints_[static_cast<std::size_t>(joint)] = record;
}

int JointSet::count_present() const {
  int n = 0;
  for (const auto& j : joints_) n += j.present() ? 1 : 0;
  return n;
}

LabelMap::LabelMap(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("negative label map size");
  if (fill >= kNumPartClasses) throw DataError("label fill value out of range");
  cells_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

LabelMap LabelMap::from_values(int height, int width, std::vector<std::uint8_t> values) {
  if (height < 0 || width < 0 ||
      values.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ShapeError("label map value count does not match " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  for (std::uint8_t v : values) {
    if (v >= kNumPartClasses) {
      throw DataError("label index out of range: " + std::to_string(static_cast<int>(v)));
    }
  }
  LabelMap m;
  m.height_ = height;
  m.width_ = width;
  m.cells_ = std::move(values);
  return m;
}

void LabelMap::set(int y, int x, std::uint8_t label) {
  if (label >= kNumPartClasses) {
    throw DataError("label index out of range: " + std::to_string(static_cast<int>(label)));
  }
  cells_[index(y, x)] = label;
}

HeatmapStack::HeatmapStack(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw ShapeError("negative heatmap size");
  values_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

RgbImage::RgbImage(int height, int width, Rgb fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("negative image size");
  pixels_.resize(3 * static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

}  // namespace jpp
