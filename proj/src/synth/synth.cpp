// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "synth/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <thread>

#include "common/error.hpp"
#include "common/labels.hpp"
#include "common/rng.hpp"
#include "video/frontend.hpp"

namespace gewild::synth {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (canvas < 16) fail(ErrorKind::Config, "synth canvas must be at least 16 px, got ", canvas);
  if (fps < 1 || seconds < 1) fail(ErrorKind::Config, "synth fps and duration must be positive");
  if (max_step < 0) fail(ErrorKind::Config, "max_step must be >= 0");
  if (!(scale_min > 0 && scale_min <= scale_max && scale_max <= 1.0))
    fail(ErrorKind::Config, "face scale range [", scale_min, ", ", scale_max, "] must lie in (0, 1]");
  if (min_faces < 1 || min_faces > max_faces) fail(ErrorKind::Config, "face count range [", min_faces, ", ", max_faces, "] invalid");
  if (max_occlusion < 0 || max_occlusion > 1) fail(ErrorKind::Config, "max_occlusion must lie in [0, 1]");
  if (frame_retries < 0 || clip_restarts < 0) fail(ErrorKind::Config, "retry limits must be >= 0");
}

std::vector<std::size_t> AssetLibrary::faces_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (faces[i].label == label) out.push_back(i);
  return out;
}

const FaceAsset& AssetLibrary::face(const std::string& id) const {
  for (const auto& f : faces)
    if (f.id == id) return f;
  fail(ErrorKind::Data, "unknown face asset ", id);
}

const BackgroundAsset& AssetLibrary::background(const std::string& id) const {
  for (const auto& b : backgrounds)
    if (b.id == id) return b;
  fail(ErrorKind::Data, "unknown background asset ", id);
}

namespace {

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".png" || ext == ".ppm")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool has_opaque_pixel(const io::Image& img) {
  if (img.channels != 4) return true;
  for (std::size_t i = 3; i < img.pixels.size(); i += 4)
    if (img.pixels[i] >= 128) return true;
  return false;
}

}  // namespace

AssetLibrary load_assets(const fs::path& faces_dir, const fs::path& backgrounds_dir) {
  AssetLibrary lib;
  for (int label = 0; label < kNumClasses; ++label) {
    const std::string cls = label_name(label);
    for (const auto& p : sorted_images(faces_dir / cls)) {
      FaceAsset f{cls + "/" + p.stem().string(), label, io::load_image(p)};
      if (!has_opaque_pixel(f.rgba)) fail(ErrorKind::Data, "face asset ", f.id, " has an empty alpha mask");
      lib.faces.push_back(std::move(f));
    }
  }
  for (const auto& p : sorted_images(backgrounds_dir)) {
    BackgroundAsset b{p.stem().string(), io::to_rgb(io::load_image(p))};
    if (b.rgb.width < 224 || b.rgb.height < 224)
      fail(ErrorKind::Data, "background ", b.id, " is ", b.rgb.width, "x", b.rgb.height, "; need at least 224x224");
    lib.backgrounds.push_back(std::move(b));
  }
  if (lib.faces.empty()) fail(ErrorKind::Data, "no face assets under ", faces_dir.string());
  if (lib.backgrounds.empty()) fail(ErrorKind::Data, "no background assets under ", backgrounds_dir.string());
  return lib;
}

std::vector<AudioPoolEntry> audio_pool(const std::vector<ManifestRecord>& records) {
  std::vector<AudioPoolEntry> pool;
  for (const auto& r : records)
    if (r.origin == "real" && r.split == "train" && !r.wav.empty()) pool.push_back({r.id, r.wav, r.label});
  return pool;
}

const AudioPoolEntry& pair_audio(int label, const std::vector<AudioPoolEntry>& pool, std::uint64_t seed) {
  std::vector<const AudioPoolEntry*> same;
  for (const auto& e : pool)
    if (e.label == label) same.push_back(&e);
  if (same.empty()) fail(ErrorKind::Data, "audio pool has no ", label_name(label), " clips");
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_int_distribution<std::size_t> pick(0, same.size() - 1);
  return *same[pick(rng)];
}

Sprite make_sprite(const io::Image& face, int target_height, int max_width) {
  if (face.width < 1 || face.height < 1) fail(ErrorKind::Data, "empty face image");
  Sprite s;
  s.height = std::max(1, target_height);
  s.width = std::clamp(static_cast<int>(std::lround(static_cast<double>(s.height) * face.width / face.height)), 1,
                       std::max(1, max_width));
  const std::size_t n = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height);
  s.mask.assign(n, 0);
  s.rgb.assign(n * 3, 0);
  for (int y = 0; y < s.height; ++y) {
    const int sy = std::min(face.height - 1, static_cast<int>((y + 0.5) * face.height / s.height));
    for (int x = 0; x < s.width; ++x) {
      const int sx = std::min(face.width - 1, static_cast<int>((x + 0.5) * face.width / s.width));
      const auto* px = face.at(sx, sy);
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(s.width) + static_cast<std::size_t>(x);
      const bool opaque = face.channels != 4 || px[3] >= 128;
      s.mask[i] = opaque ? 1 : 0;
      s.opaque += opaque;
      std::copy_n(px, 3, s.rgb.begin() + static_cast<long>(i * 3));
    }
  }
  if (s.opaque == 0) fail(ErrorKind::Data, "face mask vanished at ", s.width, "x", s.height);
  return s;
}

Sprite solid_sprite(int width, int height) {
  Sprite s;
  s.width = width;
  s.height = height;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  s.mask.assign(n, 1);
  s.rgb.assign(n * 3, 200);
  s.opaque = n;
  return s;
}

namespace {

int reflect(int v, int lo, int hi) {
  if (hi <= lo) return lo;
  while (v < lo || v > hi) {
    if (v < lo) v = 2 * lo - v;
    if (v > hi) v = 2 * hi - v;
  }
  return v;
}

int max_x(const Sprite& s, int canvas) { return std::max(0, canvas - s.width); }
int max_y(const Sprite& s, int canvas) { return std::max(0, canvas - s.height); }

Placement random_placement(const Sprite& s, int canvas, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dx(0, max_x(s, canvas)), dy(0, max_y(s, canvas));
  const int x = dx(rng);
  return {x, dy(rng)};
}

Placement step(const Sprite& s, Placement p, const SynthConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-cfg.max_step, cfg.max_step);
  const int sx = d(rng);
  const int sy = d(rng);
  return {reflect(p.x + sx, 0, max_x(s, cfg.canvas)), reflect(p.y + sy, 0, max_y(s, cfg.canvas))};
}

bool overlaps(const Sprite& a, Placement pa, const Sprite& b, Placement pb) {
  return pa.x < pb.x + b.width && pb.x < pa.x + a.width && pa.y < pb.y + b.height && pb.y < pa.y + a.height;
}

bool within_bound(const std::vector<double>& occ, double bound) {
  return std::all_of(occ.begin(), occ.end(), [&](double v) { return v <= bound; });
}

}  // namespace

TrajectorySpec plan_trajectories(std::span<const Sprite> sprites, const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(mix_seed(seed));
  TrajectorySpec t;
  t.seed = seed;
  t.positions.resize(static_cast<std::size_t>(cfg.frames()));
  for (const auto& s : sprites) t.positions[0].push_back(random_placement(s, cfg.canvas, rng));
  for (std::size_t f = 1; f < t.positions.size(); ++f)
    for (std::size_t i = 0; i < sprites.size(); ++i)
      t.positions[f].push_back(step(sprites[i], t.positions[f - 1][i], cfg, rng));
  return t;
}

std::vector<double> occlusion_fraction(std::span<const Sprite> sprites, std::span<const Placement> placements,
                                       int canvas) {
  if (sprites.size() != placements.size())
    fail(ErrorKind::Dimension, sprites.size(), " sprites but ", placements.size(), " placements");
  const std::size_t side = static_cast<std::size_t>(canvas);
  std::vector<std::int16_t> owner(side * side, -1);
  auto visit = [&](std::size_t f, auto&& fn) {
    const auto& s = sprites[f];
    const auto& p = placements[f];
    for (int y = 0; y < s.height; ++y) {
      const int cy = p.y + y;
      if (cy < 0 || cy >= canvas) continue;
      for (int x = 0; x < s.width; ++x) {
        const int cx = p.x + x;
        if (cx < 0 || cx >= canvas || !s.mask[static_cast<std::size_t>(y * s.width + x)]) continue;
        fn(owner[static_cast<std::size_t>(cy) * side + static_cast<std::size_t>(cx)]);
      }
    }
  };
  for (std::size_t f = 0; f < sprites.size(); ++f) visit(f, [&](std::int16_t& o) { o = static_cast<std::int16_t>(f); });
  std::vector<double> out(sprites.size(), 0.0);
  for (std::size_t f = 0; f < sprites.size(); ++f) {
    std::size_t covered = 0;
    visit(f, [&](std::int16_t& o) { covered += o != static_cast<std::int16_t>(f); });
    out[f] = static_cast<double>(covered) / static_cast<double>(sprites[f].opaque);
  }
  return out;
}

double OcclusionReport::max() const {
  double m = 0.0;
  for (const auto& frame : fractions)
    for (double v : frame) m = std::max(m, v);
  return m;
}

SynthClipSpec make_clip_spec(std::string id, int label, const AssetLibrary& assets,
                             const std::vector<AudioPoolEntry>& pool, const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto candidates = assets.faces_of(label);
  if (candidates.empty()) fail(ErrorKind::Data, "no ", label_name(label), " face assets");
  if (assets.backgrounds.empty()) fail(ErrorKind::Data, "no background assets");
  std::mt19937_64 rng(mix_seed(seed, 1));
  SynthClipSpec spec;
  spec.id = std::move(id);
  spec.label = label;
  spec.fps = cfg.fps;
  spec.seconds = cfg.seconds;
  spec.seed = seed;
  const int k = std::uniform_int_distribution<int>(cfg.min_faces, cfg.max_faces)(rng);
  spec.background_id = assets.backgrounds[std::uniform_int_distribution<std::size_t>(0, assets.backgrounds.size() - 1)(rng)].id;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::uniform_real_distribution<double> scale(cfg.scale_min, cfg.scale_max);
  for (int i = 0; i < k; ++i) {
    spec.face_ids.push_back(assets.faces[candidates[pick(rng)]].id);
    spec.scales.push_back(scale(rng));
  }
  spec.audio = pair_audio(label, pool, mix_seed(seed, 2)).wav;
  return spec;
}

ClipPlan plan_clip(const SynthClipSpec& spec, const AssetLibrary& assets, const SynthConfig& cfg) {
  cfg.validate();
  if (spec.face_ids.size() != spec.scales.size()) fail(ErrorKind::Data, "clip ", spec.id, ": face/scale count mismatch");
  ClipPlan plan;
  for (std::size_t i = 0; i < spec.face_ids.size(); ++i) {
    const auto& face = assets.face(spec.face_ids[i]);
    if (face.label != spec.label)
      fail(ErrorKind::Data, "clip ", spec.id, ": face ", face.id, " does not match class ", label_name(spec.label));
    plan.sprites.push_back(make_sprite(face.rgba, static_cast<int>(std::lround(spec.scales[i] * cfg.canvas)), cfg.canvas));
  }
  const std::span<const Sprite> sprites(plan.sprites);
  const std::size_t frames = static_cast<std::size_t>(cfg.frames());
  int total_retries = 0;
  double worst = 0.0;
  for (int restart = 0; restart <= cfg.clip_restarts; ++restart) {
    std::mt19937_64 rng(mix_seed(spec.seed, 100 + static_cast<std::uint64_t>(restart)));
    TrajectorySpec traj;
    traj.seed = spec.seed;
    OcclusionReport report;
    bool ok = true;

    // First frame: faces are placed one at a time over those already down.
    std::vector<Placement> cur;
    for (std::size_t i = 0; i < sprites.size() && ok; ++i) {
      cur.push_back(random_placement(sprites[i], cfg.canvas, rng));
      int attempt = 0;
      for (;; ++attempt) {
        const auto occ = occlusion_fraction(sprites.first(i + 1), cur, cfg.canvas);
        if (within_bound(occ, cfg.max_occlusion)) break;
        worst = std::max(worst, *std::max_element(occ.begin(), occ.end()));
        if (attempt == cfg.frame_retries) {
          ok = false;
          break;
        }
        cur.back() = random_placement(sprites[i], cfg.canvas, rng);
      }
      total_retries += attempt;
    }
    if (ok) {
      report.fractions.push_back(occlusion_fraction(sprites, cur, cfg.canvas));
      traj.positions.push_back(cur);
    }

    // Later frames: one step per face; faces involved in a violation redraw
    // their step.
    for (std::size_t f = 1; f < frames && ok; ++f) {
      const auto& prev = traj.positions.back();
      std::vector<Placement> next;
      for (std::size_t i = 0; i < sprites.size(); ++i) next.push_back(step(sprites[i], prev[i], cfg, rng));
      for (int attempt = 0;; ++attempt) {
        auto occ = occlusion_fraction(sprites, next, cfg.canvas);
        if (within_bound(occ, cfg.max_occlusion)) {
          traj.positions.push_back(std::move(next));
          report.fractions.push_back(std::move(occ));
          break;
        }
        worst = std::max(worst, *std::max_element(occ.begin(), occ.end()));
        if (attempt == cfg.frame_retries) {
          ok = false;
          break;
        }
        ++total_retries;
        std::vector<bool> redraw(sprites.size(), false);
        for (std::size_t a = 0; a < sprites.size(); ++a) {
          if (occ[a] <= cfg.max_occlusion) continue;
          redraw[a] = true;
          for (std::size_t b = a + 1; b < sprites.size(); ++b) redraw[b] = redraw[b] || overlaps(sprites[a], next[a], sprites[b], next[b]);
        }
        for (std::size_t i = 0; i < sprites.size(); ++i)
          if (redraw[i]) next[i] = step(sprites[i], prev[i], cfg, rng);
      }
    }
    if (ok) {
      report.frame_retries = total_retries;
      report.restarts = restart;
      plan.trajectory = std::move(traj);
      plan.report = std::move(report);
      return plan;
    }
  }
  fail(ErrorKind::Generation, "clip ", spec.id, ": could not keep ", spec.face_ids.size(),
       " faces under ", cfg.max_occlusion * 100, "% occlusion after ", cfg.clip_restarts, " restarts and ",
       total_retries, " frame retries (worst occlusion seen ", worst, ")");
}

io::Image background_canvas(const BackgroundAsset& bg, int canvas) {
  const auto resized = video::resize_bilinear(bg.rgb, canvas, canvas);
  io::Image out(canvas, canvas, 3);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(resized.data[i]), 0L, 255L));
  return out;
}

io::Image render_frame(const io::Image& background, std::span<const Sprite> sprites,
                       std::span<const Placement> placements) {
  io::Image frame = background;
  for (std::size_t f = 0; f < sprites.size(); ++f) {
    const auto& s = sprites[f];
    const auto& p = placements[f];
    for (int y = 0; y < s.height; ++y) {
      const int cy = p.y + y;
      if (cy < 0 || cy >= frame.height) continue;
      for (int x = 0; x < s.width; ++x) {
        const int cx = p.x + x;
        const std::size_t i = static_cast<std::size_t>(y * s.width + x);
        if (cx < 0 || cx >= frame.width || !s.mask[i]) continue;
        std::copy_n(s.rgb.begin() + static_cast<long>(i * 3), 3, frame.at(cx, cy));
      }
    }
  }
  return frame;
}

ClipResult generate_clip(const SynthClipSpec& spec, const AssetLibrary& assets, const SynthConfig& cfg,
                         const fs::path& frames_dir) {
  ClipResult result{spec, plan_clip(spec, assets, cfg), frames_dir};
  const auto bg = background_canvas(assets.background(spec.background_id), cfg.canvas);
  fs::create_directories(frames_dir);
  const auto& positions = result.plan.trajectory.positions;
  for (std::size_t f = 0; f < positions.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.png", f);
    io::save_png(frames_dir / name, render_frame(bg, result.plan.sprites, positions[f]));
  }
  return result;
}

std::size_t ClassCounts::of(int label) const {
  switch (label) {
    case 0: return negative;
    case 1: return neutral;
    case 2: return positive;
    default: fail(ErrorKind::Data, "class index ", label, " out of range");
  }
}

DatasetResult generate_dataset(const AssetLibrary& assets, const std::vector<AudioPoolEntry>& pool,
                               const SynthConfig& cfg, const DatasetOptions& opt, const fs::path& out_dir) {
  cfg.validate();
  DatasetResult result;
  std::size_t index = 0;
  for (int label = 0; label < kNumClasses; ++label) {
    for (std::size_t c = 0; c < opt.counts.of(label); ++c, ++index) {
      char id[32];
      std::snprintf(id, sizeof id, "synth_%05zu", index);
      result.specs.push_back(make_clip_spec(id, label, assets, pool, cfg, opt.seed ^ index));
    }
  }
  for (const auto& s : result.specs) {
    ManifestRecord r;
    r.id = s.id;
    r.frames = out_dir / "frames" / s.id;
    r.wav = out_dir / "audio" / (s.id + ".wav");
    r.label = s.label;
    r.split = "train";
    r.origin = "synthetic";
    result.records.push_back(std::move(r));
  }
  if (opt.plan_only) return result;

  fs::create_directories(out_dir / "audio");
  result.reports.resize(result.specs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(result.specs.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < result.specs.size(); i = next++) {
      try {
        const auto& spec = result.specs[i];
        auto clip = generate_clip(spec, assets, cfg, result.records[i].frames);
        fs::copy_file(spec.audio, result.records[i].wav, fs::copy_options::overwrite_existing);
        result.reports[i] = std::move(clip.plan.report);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, opt.workers ? opt.workers : std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool_threads;
    for (unsigned t = 1; t < threads; ++t) pool_threads.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  write_manifest(out_dir / "manifest.tsv", result.records);
  return result;
}

}  // namespace gewild::synth
