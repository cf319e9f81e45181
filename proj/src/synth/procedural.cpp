// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "synth/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "audio/wav.hpp"
#include "common/labels.hpp"
#include "common/manifest.hpp"
#include "common/rng.hpp"
#include "io/image.hpp"

namespace gewild::synth {

namespace fs = std::filesystem;

namespace {

constexpr int kFaceSize = 96;
constexpr std::uint8_t kFaceColour[3][3] = {{60, 80, 210}, {150, 150, 150}, {245, 200, 40}};
constexpr double kTonePitch[3] = {220.0, 660.0, 1760.0};

io::Image face_image(int label, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> jitter(-20, 20);
  std::uint8_t colour[3];
  for (int c = 0; c < 3; ++c) colour[c] = static_cast<std::uint8_t>(std::clamp(kFaceColour[label][c] + jitter(rng), 0, 255));
  io::Image img(kFaceSize, kFaceSize, 4, 0);
  const double cx = kFaceSize / 2.0, cy = kFaceSize / 2.0, r = kFaceSize * 0.45;
  // Mouth curvature: frown, flat, smile.
  const double bend = (label - 1) * 0.02;
  for (int y = 0; y < kFaceSize; ++y)
    for (int x = 0; x < kFaceSize; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy > r * r) continue;
      auto* px = img.at(x, y);
      std::copy_n(colour, 3, px);
      px[3] = 255;
      const bool eye = std::hypot(std::abs(dx) - r * 0.38, dy + r * 0.3) < r * 0.1;
      const double mouth_y = r * 0.4 - bend * (r * r * 0.25 - dx * dx) / r * 10.0;
      const bool mouth = std::abs(dx) < r * 0.5 && std::abs(dy - mouth_y) < r * 0.06;
      if (eye || mouth) std::fill_n(px, 3, std::uint8_t{20});
    }
  return img;
}

io::Image background_image(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> channel(0, 255), noise(-6, 6);
  const int a[3] = {channel(rng), channel(rng), channel(rng)};
  const int b[3] = {channel(rng), channel(rng), channel(rng)};
  io::Image img(256, 256, 3);
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) {
      const double t = (x + y) / 510.0;
      for (int c = 0; c < 3; ++c)
        img.at(x, y)[c] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(a[c] + t * (b[c] - a[c])) + noise(rng), 0, 255));
    }
  return img;
}

audio::AudioClip tone_clip(int label, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> detune(0.95, 1.05), phase(0, 2 * std::numbers::pi);
  std::normal_distribution<double> hiss(0.0, 0.02);
  const double f = kTonePitch[label] * detune(rng), ph = phase(rng);
  audio::AudioClip clip{std::vector<float>(5 * 16000), 16000, 1};
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    clip.samples[i] = static_cast<float>(0.4 * std::sin(2 * std::numbers::pi * f * t + ph) +
                                         0.15 * std::sin(4 * std::numbers::pi * f * t) + hiss(rng));
  }
  return clip;
}

}  // namespace

ProceduralAssets write_procedural_assets(const fs::path& dir, const ProceduralOptions& opt) {
  ProceduralAssets out{dir / "faces", dir / "backgrounds", dir / "pool.tsv"};
  std::mt19937_64 rng(mix_seed(opt.seed));
  char name[64];
  for (int label = 0; label < kNumClasses; ++label) {
    fs::create_directories(out.faces_dir / label_name(label));
    for (int i = 0; i < opt.faces_per_class; ++i) {
      std::snprintf(name, sizeof name, "face_%02d.png", i);
      io::save_png(out.faces_dir / label_name(label) / name, face_image(label, rng));
    }
  }
  fs::create_directories(out.backgrounds_dir);
  for (int i = 0; i < opt.backgrounds; ++i) {
    std::snprintf(name, sizeof name, "bg_%02d.png", i);
    io::save_png(out.backgrounds_dir / name, background_image(rng));
  }
  std::vector<ManifestRecord> pool;
  fs::create_directories(dir / "audio");
  for (int label = 0; label < kNumClasses; ++label)
    for (int i = 0; i < opt.audio_per_class; ++i) {
      std::snprintf(name, sizeof name, "%s_%02d", label_name(label).c_str(), i);
      ManifestRecord r;
      r.id = name;
      r.wav = dir / "audio" / (r.id + ".wav");
      r.label = label;
      audio::save_wav_pcm16(r.wav, tone_clip(label, rng));
      pool.push_back(std::move(r));
    }
  write_manifest(out.pool_manifest, pool);
  return out;
}

}  // namespace gewild::synth
