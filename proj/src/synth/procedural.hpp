// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Small self-made asset sets for demos and tests: cartoon faces whose colour
// and mouth shape follow the class, gradient backgrounds, and tone clips whose
// pitch follows the class.

#pragma once

#include <cstdint>
#include <filesystem>

namespace gewild::synth {

struct ProceduralOptions {
  int faces_per_class = 4;
  int backgrounds = 3;
  int audio_per_class = 3;
  std::uint64_t seed = 1;
};

struct ProceduralAssets {
  std::filesystem::path faces_dir;
  std::filesystem::path backgrounds_dir;
  std::filesystem::path pool_manifest;  // real train clips with audio only
};

ProceduralAssets write_procedural_assets(const std::filesystem::path& dir, const ProceduralOptions& opt = {});

}  // namespace gewild::synth
