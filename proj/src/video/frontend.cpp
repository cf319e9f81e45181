// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "video/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "common/error.hpp"

namespace gewild::video {

std::vector<int> sample_frame_indices(int available, int n) {
  if (available < 1) fail(ErrorKind::Data, "clip has no frames");
  if (n < 1) fail(ErrorKind::Config, "frame count must be >= 1");
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  if (n == 1) return idx;
  const long last = available - 1;
  for (long k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = static_cast<int>(k * last / (n - 1));
  return idx;
}

io::Image load_frame(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Data, "missing frame ", path.string());
  try {
    return io::to_rgb(io::load_image(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Unsupported) throw;
    fail(ErrorKind::Data, "cannot decode frame ", path.string(), ": ", e.what());
  }
}

FloatImage resize_bilinear(const io::Image& img, int out_width, int out_height) {
  if (img.width < 1 || img.height < 1 || out_width < 1 || out_height < 1)
    fail(ErrorKind::Dimension, "resize needs non-empty images");
  FloatImage out{out_width, out_height,
                 std::vector<float>(static_cast<std::size_t>(out_width) * static_cast<std::size_t>(out_height) * 3)};
  const double sx = static_cast<double>(img.width) / out_width;
  const double sy = static_cast<double>(img.height) / out_height;
  const int ch = img.channels;
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const auto* p00 = img.at(x0, y0);
      const auto* p01 = img.at(x1, y0);
      const auto* p10 = img.at(x0, y1);
      const auto* p11 = img.at(x1, y1);
      float* dst = out.data.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(out_width) + static_cast<std::size_t>(x)) * 3;
      for (int c = 0; c < 3 && c < ch; ++c) {
        const double top = p00[c] * (1.0 - wx) + p01[c] * wx;
        const double bottom = p10[c] * (1.0 - wx) + p11[c] * wx;
        dst[c] = static_cast<float>(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

std::vector<float> normalize(const FloatImage& img) {
  const std::size_t plane = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  std::vector<float> out(plane * 3);
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) out[c * plane + i] = (img.data[i * 3 + c] / 255.0f - 0.5f) / 0.5f;
  return out;
}

std::vector<float> normalize(const io::Image& img) {
  FloatImage f{img.width, img.height, std::vector<float>(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3)};
  for (std::size_t i = 0; i < f.data.size() / 3; ++i)
    for (std::size_t c = 0; c < 3; ++c) f.data[i * 3 + c] = img.pixels[i * static_cast<std::size_t>(img.channels) + c];
  return normalize(f);
}

FrameSequence clip_to_frame_sequence(const std::filesystem::path& dir, int n, std::string clip_id) {
  if (clip_id.empty()) clip_id = dir.filename().string();
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Data, "clip ", clip_id, ": frame directory ", dir.string(), " missing");
  static const std::regex pattern(R"(frame_(\d{5})\.(png|ppm))");
  std::map<int, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace(std::stoi(m[1].str()), entry.path());
  }
  if (files.empty()) fail(ErrorKind::Data, "clip ", clip_id, ": no frame_%05d images in ", dir.string());
  std::vector<std::filesystem::path> ordered;
  for (auto& [idx, p] : files) ordered.push_back(p);

  FrameSequence seq;
  seq.clip_id = clip_id;
  seq.n = static_cast<std::size_t>(n);
  seq.source_indices = sample_frame_indices(static_cast<int>(ordered.size()), n);
  if (static_cast<int>(ordered.size()) < n) {
    seq.warnings.push_back("clip " + clip_id + ": only " + std::to_string(ordered.size()) + " frames for " +
                           std::to_string(n) + " samples; frames repeat");
  }
  const std::size_t frame_size = 3 * static_cast<std::size_t>(kFrameSize) * kFrameSize;
  seq.frames.resize(seq.n * frame_size);
  int cached_index = -1;
  std::vector<float> cached;
  for (std::size_t k = 0; k < seq.n; ++k) {
    const int src = seq.source_indices[k];
    if (src != cached_index) {
      try {
        cached = normalize(resize_bilinear(load_frame(ordered[static_cast<std::size_t>(src)])));
      } catch (const Error& e) {
        fail(e.kind() == ErrorKind::Unsupported ? ErrorKind::Unsupported : ErrorKind::Data, "clip ", clip_id,
             " frame ", src, ": ", e.what());
      }
      cached_index = src;
    }
    std::copy(cached.begin(), cached.end(), seq.frames.begin() + static_cast<long>(k * frame_size));
  }
  return seq;
}

}  // namespace gewild::video
