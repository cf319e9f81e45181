// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "audio/wav.hpp"

namespace gewild::audio {

inline constexpr int kTargetRate = 16000;

/// Rational polyphase resampler with a Kaiser-windowed sinc prototype
/// (beta 8, 32 taps per output phase). Each phase is normalized to unit DC
/// gain.
class PolyphaseResampler {
 public:
  static constexpr int kTapsPerPhase = 32;
  static constexpr double kKaiserBeta = 8.0;

  PolyphaseResampler(int input_rate, int output_rate);

  std::vector<float> process(std::span<const float> input) const;

  int up() const { return up_; }
  int down() const { return down_; }

 private:
  int up_ = 1;
  int down_ = 1;
  std::vector<float> taps_;  // [up_][kTapsPerPhase]
};

/// Mono 16 kHz output; input at 16 kHz is returned bit-identical. Accepts
/// source rates in [8000, 48000].
AudioClip resample_16k(const AudioClip& clip);

}  // namespace gewild::audio
