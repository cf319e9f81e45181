// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "audio/mel.hpp"
#include "audio/resample.hpp"
#include "audio/wav.hpp"

namespace gewild::audio {

inline constexpr std::size_t kWindowSamples = 16000;
inline constexpr std::size_t kClipSamples = 80000;  // 5 s at 16 kHz
inline constexpr std::size_t kMelRows = 128;
inline constexpr std::size_t kMelCols = 251;

/// n log-mel images of 128 x 251, row-major [n][128][251].
struct MelFrameSequence {
  std::string clip_id;
  std::size_t n = 0;
  std::vector<float> frames;
};

/// Arithmetic mean of the channels; mono passes through unchanged.
AudioClip mixdown_mono(const AudioClip& clip);

/// Mono, 16 kHz, exactly five seconds (zero-padded or truncated).
AudioClip standardize(const AudioClip& clip);

/// Start offsets of n one-second windows over `length` samples. When n equals
/// the whole number of seconds the windows tile without overlap; otherwise
/// the hop is chosen so the n windows span the clip exactly.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t n);

/// n windows of 16000 samples; samples past the end read as zero.
std::vector<std::vector<float>> frame_audio(const AudioClip& clip, std::size_t n);

MelFrameSequence clip_to_mel_sequence(const AudioClip& clip, std::size_t n, std::string clip_id = {});

}  // namespace gewild::audio
