// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "common/kv.hpp"

namespace gewild::model {

inline constexpr std::size_t kImageSize = 224;
inline constexpr std::size_t kMelRows = 128;
inline constexpr std::size_t kMelCols = 251;

/// Which monomodal branches feed the classifier. Cross-attention exists only
/// when both are active.
struct Branches {
  bool video = true;
  bool audio = true;

  bool both() const { return video && audio; }
  std::string to_string() const;
  /// "video", "audio" or "video,audio" (order-insensitive).
  static Branches parse(const std::string& text);
  bool operator==(const Branches&) const = default;
};

struct VitConfig {
  std::size_t patch_size = 14;
  std::size_t depth = 24;
  std::size_t hidden = 1024;
  std::size_t heads = 16;
  std::size_t mlp_dim = 4096;
};

struct ModelConfig {
  std::size_t d_model = 1024;
  std::size_t n_frames = 5;
  VitConfig vit;
  std::vector<std::size_t> audio_cnn_channels{16, 32, 64, 128};
  std::size_t encoder_heads = 4;
  std::size_t encoder_ff = 2048;
  std::size_t cross_heads = 4;
  std::size_t classes = 3;
  Branches branches;
  std::uint64_t seed = 0;

  /// ViT-Large/14 geometry with d_model 1024.
  static ModelConfig paper();
  /// Depth-2, width-64 variant that trains on a workstation CPU.
  static ModelConfig desk();
  /// Smallest consistent model, for gradient checks and smoke runs.
  static ModelConfig tiny();
  static ModelConfig preset(const std::string& name);

  void validate() const;

  std::size_t patch_tokens() const { return (kImageSize / vit.patch_size) * (kImageSize / vit.patch_size); }
  /// Spatial size of the mel image after the CNN pools, {rows, cols}.
  std::pair<std::size_t, std::size_t> pooled_mel_shape() const;
  std::size_t audio_flatten_width() const;
  std::size_t classifier_width() const;

  /// Architecture keys (everything except the init seed).
  KeyValues to_kv() const;
  /// Starts from `preset` (default "desk") and applies overrides.
  static ModelConfig from_kv(const KeyValues& kv);
  /// Stable hash of the architecture keys.
  std::uint64_t hash() const;
};

}  // namespace gewild::model
