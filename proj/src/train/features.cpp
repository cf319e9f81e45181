// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "train/features.hpp"

#include <unistd.h>

#include <algorithm>
#include <thread>

#include "audio/wav.hpp"
#include "common/error.hpp"
#include "io/archive.hpp"

namespace gewild::train {
namespace fs = std::filesystem;

namespace {

void save_single(const fs::path& path, const std::string& key, const nn::BasicTensor<float>& t) {
  io::TensorArchive archive;
  std::vector<std::uint32_t> dims(t.shape().begin(), t.shape().end());
  archive.put(key, std::move(dims), std::vector<float>(t.data().begin(), t.data().end()));
  // Write then rename so concurrent readers never see a partial file.
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  archive.save(tmp);
  fs::rename(tmp, path);
}

nn::BasicTensor<float> load_single(const fs::path& path, const std::string& key, const nn::Shape& tail) {
  auto archive = io::TensorArchive::load(path);
  const auto* e = archive.find(key);
  if (!e) fail(ErrorKind::Format, path.string(), " has no '", key, "' entry");
  nn::Shape shape(e->dims.begin(), e->dims.end());
  if (shape.size() != tail.size() + 1 || !std::equal(tail.begin(), tail.end(), shape.begin() + 1))
    fail(ErrorKind::Format, path.string(), ": '", key, "' has shape ", nn::shape_str(shape));
  return nn::BasicTensor<float>(std::move(shape), e->data);
}

const nn::Shape kMelTail{model::kMelRows, model::kMelCols};
const nn::Shape kFrameTail{3, model::kImageSize, model::kImageSize};

}  // namespace

nn::BasicTensor<float> mel_tensor(audio::MelFrameSequence seq) {
  return nn::BasicTensor<float>({seq.n, model::kMelRows, model::kMelCols}, std::move(seq.frames));
}

nn::BasicTensor<float> frame_tensor(video::FrameSequence seq) {
  return nn::BasicTensor<float>({seq.n, 3, model::kImageSize, model::kImageSize}, std::move(seq.frames));
}

void save_mel_features(const fs::path& path, const nn::BasicTensor<float>& mels) { save_single(path, "mel", mels); }
void save_frame_features(const fs::path& path, const nn::BasicTensor<float>& frames) {
  save_single(path, "frames", frames);
}
nn::BasicTensor<float> load_mel_features(const fs::path& path) { return load_single(path, "mel", kMelTail); }
nn::BasicTensor<float> load_frame_features(const fs::path& path) { return load_single(path, "frames", kFrameTail); }

DiskFeatureProvider::DiskFeatureProvider(std::size_t n_frames, model::Branches branches, fs::path cache_dir)
    : n_(n_frames), branches_(branches), cache_(std::move(cache_dir)) {
  if (!cache_.empty()) fs::create_directories(cache_);
}

ClipFeatures DiskFeatureProvider::load(const ManifestRecord& record) const {
  ClipFeatures out{record.id, record.label, {}};
  const std::string stem = record.id + ".n" + std::to_string(n_);
  auto cached = [&](const char* kind, auto&& compute, auto&& save, auto&& read) {
    if (cache_.empty()) return compute();
    const auto path = cache_ / (stem + kind);
    if (fs::exists(path)) return read(path);
    auto t = compute();
    save(path, t);
    return t;
  };
  if (branches_.audio) {
    if (record.wav.empty()) fail(ErrorKind::Data, "clip ", record.id, " has no audio but the audio branch is active");
    out.tensors.mels = cached(
        ".mel.gewt",
        [&] { return mel_tensor(audio::clip_to_mel_sequence(audio::load_wav(record.wav), n_, record.id)); },
        save_mel_features, load_mel_features);
  }
  if (branches_.video) {
    if (record.frames.empty()) fail(ErrorKind::Data, "clip ", record.id, " has no frames but the video branch is active");
    out.tensors.frames = cached(
        ".frames.gewt",
        [&] { return frame_tensor(video::clip_to_frame_sequence(record.frames, static_cast<int>(n_), record.id)); },
        save_frame_features, load_frame_features);
  }
  return out;
}

void MemoryFeatureProvider::add(const std::string& id, ClipTensors tensors) { table_[id] = std::move(tensors); }

ClipFeatures MemoryFeatureProvider::load(const ManifestRecord& record) const {
  auto it = table_.find(record.id);
  if (it == table_.end()) fail(ErrorKind::Data, "no features for clip ", record.id);
  return {record.id, record.label, it->second};
}

}  // namespace gewild::train
