// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Whole-frame video input preparation. Frames are sampled, resized and
// normalized as complete images; nothing here looks inside a frame.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "io/image.hpp"

namespace gewild::video {

inline constexpr int kFrameSize = 224;

/// Row-major H x W x 3, values on the 0..255 scale.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;
};

struct FrameSequence {
  std::string clip_id;
  std::size_t n = 0;
  std::vector<int> source_indices;
  std::vector<float> frames;  // [n][3][224][224]
  std::vector<std::string> warnings;
};

/// Endpoint-inclusive uniform sampling: floor(k * (F - 1) / (n - 1)), or [0]
/// for n == 1. When F < n indices repeat.
std::vector<int> sample_frame_indices(int available, int n);

/// Lossless raster (PNG or binary PPM) as 8-bit RGB.
io::Image load_frame(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers and edge clamping.
FloatImage resize_bilinear(const io::Image& img, int out_width = kFrameSize, int out_height = kFrameSize);

/// (v / 255 - 0.5) / 0.5 per channel, channel-first output.
std::vector<float> normalize(const FloatImage& img);
std::vector<float> normalize(const io::Image& img);

/// Samples n frames from `<dir>/frame_%05d.{png,ppm}`, resizes to 224x224
/// and normalizes them.
FrameSequence clip_to_frame_sequence(const std::filesystem::path& dir, int n, std::string clip_id = {});

}  // namespace gewild::video
