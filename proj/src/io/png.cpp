// SPDX-License-Identifier: Apache-2.0
#include "jppnet/io/png.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "jppnet/core/errors.hpp"

namespace jpp::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

void write_rows(const std::filesystem::path& path, int height, int width, int color_type,
                int channels, const std::uint8_t* data) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw DataError("png_create_write_struct failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw DataError("failed to write " + path.string());
}

struct Decoded {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

Decoded read_any(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError("not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw DataError("png_create_read_struct failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  Decoded out;
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if ((color_type & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, out.data.data() + static_cast<std::size_t>(y) * stride, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_rows(path, image.height(), image.width(), PNG_COLOR_TYPE_RGB, 3, image.bytes().data());
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_rows(path, image.height, image.width, PNG_COLOR_TYPE_GRAY, 1, image.values.data());
}

void write_png(const std::filesystem::path& path, const LabelMap& labels) {
  write_rows(path, labels.height(), labels.width(), PNG_COLOR_TYPE_GRAY, 1,
             labels.values().data());
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  Decoded d = read_any(path);
  if (d.channels != 3) {
    throw DataError("expected an RGB PNG (" + std::to_string(d.channels) +
                    " channels found): " + path.string());
  }
  RgbImage image(d.height, d.width);
  std::copy(d.data.begin(), d.data.end(), image.bytes().begin());
  return image;
}

GrayImage read_png_gray(const std::filesystem::path& path) {
  Decoded d = read_any(path);
  if (d.channels != 1) {
    throw DataError("expected a single-channel PNG (" + std::to_string(d.channels) +
                    " channels found): " + path.string());
  }
  return {d.height, d.width, std::move(d.data)};
}

}  // namespace jpp::io
