// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/image.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <string>

#include "common/error.hpp"
#include "io/archive.hpp"

namespace gewild::io {

namespace {

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    fail(ErrorKind::Format, "corrupt PNG: ", png.message);
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    fail(ErrorKind::Unsupported, "unsupported PNG bit depth (16-bit); 8-bit images only");
  }
  const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), alpha ? 4 : 3);
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr))
    fail(ErrorKind::Format, "corrupt PNG: ", png.message);
  return img;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail(ErrorKind::Format, "corrupt PPM header at byte ", pos);
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0) fail(ErrorKind::Format, "PPM has empty dimensions");
  if (maxval != 255) fail(ErrorKind::Unsupported, "unsupported PPM maxval ", maxval, "; 8-bit images only");
  ++pos;  // single whitespace before raster
  Image img(static_cast<int>(w), static_cast<int>(h), 3);
  if (bytes.size() < pos + img.pixels.size())
    fail(ErrorKind::Format, "PPM raster truncated at byte ", bytes.size());
  std::memcpy(img.pixels.data(), bytes.data() + pos, img.pixels.size());
  return img;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  fail(ErrorKind::Unsupported, "unrecognized image format (expected PNG or binary PPM)");
}

Image load_image(const std::filesystem::path& path) { return decode_image(read_file_bytes(path)); }

void save_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 3 && img.channels != 4) fail(ErrorKind::Unsupported, "PNG writer needs RGB or RGBA");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, img.pixels.data(), 0, nullptr))
    fail(ErrorKind::Io, "cannot write PNG ", path.string(), ": ", png.message);
}

void save_ppm(const std::filesystem::path& path, const Image& img) {
  const Image rgb = to_rgb(img);
  const std::string header = "P6\n" + std::to_string(rgb.width) + " " + std::to_string(rgb.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), rgb.pixels.begin(), rgb.pixels.end());
  write_file_bytes(path, out);
}

Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image out(img.width, img.height, 3);
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) out.pixels[i * 3 + static_cast<std::size_t>(c)] = img.pixels[i * static_cast<std::size_t>(img.channels) + static_cast<std::size_t>(c)];
  return out;
}

}  // namespace gewild::io
