// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "jppnet/core/types.hpp"

namespace jpp::io {

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;
};

/// PNG files are written with fixed compression settings and no time or text
/// chunks, so identical pixels always produce identical bytes.
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const LabelMap& labels);

RgbImage read_png_rgb(const std::filesystem::path& path);
GrayImage read_png_gray(const std::filesystem::path& path);

}  // namespace jpp::io
