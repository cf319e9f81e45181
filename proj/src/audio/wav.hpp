// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace gewild::audio {

/// Interleaved samples in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;
  int channels = 0;

  std::size_t frames() const { return channels ? samples.size() / static_cast<std::size_t>(channels) : 0; }
  /// Zero-length data chunk; callers decide whether silence padding is acceptable.
  bool empty() const { return samples.empty(); }
};

/// RIFF/WAVE with 16-bit PCM or 32-bit IEEE float, one or two channels.
/// 16-bit samples are scaled by 1/32768.
AudioClip load_wav(const std::filesystem::path& path);
AudioClip parse_wav(std::span<const std::uint8_t> bytes);

void save_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip);
void save_wav_float(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace gewild::audio
