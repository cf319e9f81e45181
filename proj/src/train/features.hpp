// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Model inputs per clip. Features come either from an in-memory table or
// from disk, where log-mel stacks and frame stacks are computed from the
// manifest paths and optionally cached as GEWT archives.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "audio/frontend.hpp"
#include "common/manifest.hpp"
#include "model/fusion_model.hpp"
#include "video/frontend.hpp"

namespace gewild::train {

using ClipTensors = model::ClipTensors<float>;

struct ClipFeatures {
  std::string id;
  int label = 0;
  ClipTensors tensors;
};

/// Must be safe to call load() from several threads at once.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual ClipFeatures load(const ManifestRecord& record) const = 0;
};

class DiskFeatureProvider : public FeatureProvider {
 public:
  /// An empty `cache_dir` disables caching.
  DiskFeatureProvider(std::size_t n_frames, model::Branches branches, std::filesystem::path cache_dir = {});
  ClipFeatures load(const ManifestRecord& record) const override;

 private:
  std::size_t n_;
  model::Branches branches_;
  std::filesystem::path cache_;
};

class MemoryFeatureProvider : public FeatureProvider {
 public:
  void add(const std::string& id, ClipTensors tensors);
  ClipFeatures load(const ManifestRecord& record) const override;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, ClipTensors> table_;
};

nn::BasicTensor<float> mel_tensor(audio::MelFrameSequence seq);
nn::BasicTensor<float> frame_tensor(video::FrameSequence seq);

/// Single-entry archives: key "mel" holds [n,128,251], key "frames" holds
/// [n,3,224,224].
void save_mel_features(const std::filesystem::path& path, const nn::BasicTensor<float>& mels);
void save_frame_features(const std::filesystem::path& path, const nn::BasicTensor<float>& frames);
nn::BasicTensor<float> load_mel_features(const std::filesystem::path& path);
nn::BasicTensor<float> load_frame_features(const std::filesystem::path& path);

}  // namespace gewild::train
