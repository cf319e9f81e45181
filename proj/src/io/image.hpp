// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gewild::io {

/// 8-bit interleaved raster, row-major HxWxC with C in {3, 4}.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                               static_cast<std::size_t>(channels);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                               static_cast<std::size_t>(channels);
  }
};

/// Decodes PNG (8-bit only) or binary PPM (P6, maxval 255). Images with an
/// alpha channel decode to RGBA, everything else to RGB; grayscale is
/// replicated across the three channels.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);

void save_png(const std::filesystem::path& path, const Image& img);
void save_ppm(const std::filesystem::path& path, const Image& img);

/// Drops alpha (no compositing).
Image to_rgb(const Image& img);

}  // namespace gewild::io
