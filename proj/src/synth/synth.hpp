// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic group clips: same-emotion face cutouts drifting over a fixed
// background, each paired with a real audio track of the same class.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "common/manifest.hpp"
#include "io/image.hpp"

namespace gewild::synth {

struct SynthConfig {
  int canvas = 224;
  int fps = 15;
  int seconds = 5;
  int max_step = 8;  // pixels per frame and axis
  double max_occlusion = 0.10;
  double scale_min = 0.15;  // face height as a fraction of the canvas
  double scale_max = 0.30;
  int min_faces = 3;
  int max_faces = 9;
  int frame_retries = 100;
  int clip_restarts = 10;

  int frames() const { return fps * seconds; }
  void validate() const;
};

struct FaceAsset {
  std::string id;
  int label = 0;
  io::Image rgba;  // alpha is the cutout mask
};

struct BackgroundAsset {
  std::string id;
  io::Image rgb;
};

struct AssetLibrary {
  std::vector<FaceAsset> faces;
  std::vector<BackgroundAsset> backgrounds;

  std::vector<std::size_t> faces_of(int label) const;
  const FaceAsset& face(const std::string& id) const;
  const BackgroundAsset& background(const std::string& id) const;
};

/// Reads `faces_dir/<class>/*.png` and `backgrounds_dir/*.{png,ppm}`.
AssetLibrary load_assets(const std::filesystem::path& faces_dir, const std::filesystem::path& backgrounds_dir);

struct AudioPoolEntry {
  std::string id;
  std::filesystem::path wav;
  int label = 0;
};

/// Real training clips that carry audio.
std::vector<AudioPoolEntry> audio_pool(const std::vector<ManifestRecord>& records);

/// Uniform choice among pool entries of `label`; deterministic per seed.
const AudioPoolEntry& pair_audio(int label, const std::vector<AudioPoolEntry>& pool, std::uint64_t seed);

/// A face scaled for one clip; mask is 1 where the cutout is opaque.
struct Sprite {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> rgb;
  std::size_t opaque = 0;
};

Sprite make_sprite(const io::Image& face, int target_height, int max_width);
/// Fully opaque rectangle, handy for geometry tests.
Sprite solid_sprite(int width, int height);

struct Placement {
  int x = 0;  // top-left corner on the canvas
  int y = 0;
  bool operator==(const Placement&) const = default;
};

struct TrajectorySpec {
  std::uint64_t seed = 0;
  std::vector<std::vector<Placement>> positions;  // [frame][face]
};

/// Independent bounded random walks, reflected at the canvas edges so every
/// sprite stays fully on the canvas.
TrajectorySpec plan_trajectories(std::span<const Sprite> sprites, const SynthConfig& cfg, std::uint64_t seed);

/// Fraction of each face's opaque pixels covered by faces later in the list.
std::vector<double> occlusion_fraction(std::span<const Sprite> sprites, std::span<const Placement> placements,
                                       int canvas);

struct OcclusionReport {
  std::vector<std::vector<double>> fractions;  // [frame][face]
  int frame_retries = 0;
  int restarts = 0;

  double max() const;
};

struct SynthClipSpec {
  std::string id;
  int label = 0;
  std::string background_id;
  std::vector<std::string> face_ids;
  std::vector<double> scales;
  int fps = 15;
  int seconds = 5;
  std::uint64_t seed = 0;
  std::filesystem::path audio;
};

SynthClipSpec make_clip_spec(std::string id, int label, const AssetLibrary& assets,
                             const std::vector<AudioPoolEntry>& pool, const SynthConfig& cfg, std::uint64_t seed);

struct ClipPlan {
  std::vector<Sprite> sprites;
  TrajectorySpec trajectory;
  OcclusionReport report;
};

/// Trajectories that respect the occlusion bound. Offending frame steps are
/// re-drawn, then the whole clip is re-seeded; exhausting both throws a
/// generation error.
ClipPlan plan_clip(const SynthClipSpec& spec, const AssetLibrary& assets, const SynthConfig& cfg);

io::Image background_canvas(const BackgroundAsset& bg, int canvas);
io::Image render_frame(const io::Image& background, std::span<const Sprite> sprites,
                       std::span<const Placement> placements);

struct ClipResult {
  SynthClipSpec spec;
  ClipPlan plan;
  std::filesystem::path frames_dir;
};

/// Plans and renders one clip into `frames_dir/frame_%05d.png`.
ClipResult generate_clip(const SynthClipSpec& spec, const AssetLibrary& assets, const SynthConfig& cfg,
                         const std::filesystem::path& frames_dir);

struct ClassCounts {
  std::size_t negative = 934;
  std::size_t neutral = 923;
  std::size_t positive = 802;

  std::size_t of(int label) const;
  std::size_t total() const { return negative + neutral + positive; }
};

struct DatasetOptions {
  ClassCounts counts;
  std::uint64_t seed = 0;
  bool plan_only = false;  // specs and manifest records only; nothing is rendered or written
  unsigned workers = 0;    // 0 = hardware concurrency
};

struct DatasetResult {
  std::vector<ManifestRecord> records;
  std::vector<SynthClipSpec> specs;
  std::vector<OcclusionReport> reports;  // empty in plan-only mode
};

/// Emits `out_dir/frames/<id>/`, `out_dir/audio/<id>.wav` and
/// `out_dir/manifest.tsv`. Clip i uses seed `seed ^ i`.
DatasetResult generate_dataset(const AssetLibrary& assets, const std::vector<AudioPoolEntry>& pool,
                               const SynthConfig& cfg, const DatasetOptions& opt,
                               const std::filesystem::path& out_dir);

}  // namespace gewild::synth
