// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "common/manifest.hpp"
#include "train/features.hpp"

namespace gewild::testing {

struct ToySet {
  std::vector<ManifestRecord> records;
  train::MemoryFeatureProvider features;
};

/// Linearly separable clips: every frame and mel value sits near a class
/// dependent offset, with uniform noise of amplitude `noise`.
inline ToySet make_toy_set(std::size_t count, std::size_t n_frames, std::uint64_t seed, double noise = 0.2,
                           const std::string& prefix = "toy") {
  ToySet set;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> jitter(static_cast<float>(-noise), static_cast<float>(noise));
  for (std::size_t i = 0; i < count; ++i) {
    ManifestRecord r;
    r.id = prefix + std::to_string(i);
    r.label = static_cast<int>(i % 3);
    const float offset = 0.5f * static_cast<float>(r.label - 1);
    std::vector<float> frames(n_frames * 3 * 224 * 224), mels(n_frames * 128 * 251);
    for (auto& v : frames) v = offset + jitter(rng);
    for (auto& v : mels) v = 4.0f * offset + jitter(rng);
    set.features.add(r.id, {nn::BasicTensor<float>({n_frames, 3, 224, 224}, std::move(frames)),
                            nn::BasicTensor<float>({n_frames, 128, 251}, std::move(mels))});
    set.records.push_back(std::move(r));
  }
  return set;
}

}  // namespace gewild::testing
