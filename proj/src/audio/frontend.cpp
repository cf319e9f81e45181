// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "audio/frontend.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace gewild::audio {

AudioClip mixdown_mono(const AudioClip& clip) {
  if (clip.channels == 1) return clip;
  if (clip.channels != 2) fail(ErrorKind::Unsupported, "mixdown supports 1-2 channels, got ", clip.channels);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.channels = 1;
  const std::size_t frames = clip.frames();
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i)
    out.samples[i] = (clip.samples[2 * i] + clip.samples[2 * i + 1]) * 0.5f;
  return out;
}

AudioClip standardize(const AudioClip& clip) {
  AudioClip out = resample_16k(mixdown_mono(clip));
  out.samples.resize(kClipSamples, 0.0f);
  return out;
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t n) {
  if (n < 1) fail(ErrorKind::Config, "frame count must be >= 1");
  std::vector<std::size_t> starts(n, 0);
  if (n == 1) return starts;
  if (length % kWindowSamples == 0 && n == length / kWindowSamples) {
    for (std::size_t k = 0; k < n; ++k) starts[k] = k * kWindowSamples;
    return starts;
  }
  const double span = static_cast<double>(length > kWindowSamples ? length - kWindowSamples : 0);
  for (std::size_t k = 0; k < n; ++k)
    starts[k] = static_cast<std::size_t>(std::llround(static_cast<double>(k) * span / static_cast<double>(n - 1)));
  return starts;
}

std::vector<std::vector<float>> frame_audio(const AudioClip& clip, std::size_t n) {
  if (clip.channels != 1 || clip.sample_rate != kTargetRate)
    fail(ErrorKind::Config, "frame_audio needs a standardized 16 kHz mono clip");
  const auto starts = window_starts(clip.samples.size(), n);
  std::vector<std::vector<float>> windows;
  windows.reserve(n);
  for (std::size_t s : starts) {
    std::vector<float> w(kWindowSamples, 0.0f);
    if (s < clip.samples.size()) {
      const std::size_t avail = std::min(kWindowSamples, clip.samples.size() - s);
      std::copy_n(clip.samples.begin() + static_cast<long>(s), avail, w.begin());
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

MelFrameSequence clip_to_mel_sequence(const AudioClip& clip, std::size_t n, std::string clip_id) {
  const auto windows = frame_audio(standardize(clip), n);
  thread_local const MelSpectrogram extractor;
  MelFrameSequence seq;
  seq.clip_id = std::move(clip_id);
  seq.n = n;
  const std::size_t frame_size = kMelRows * kMelCols;
  seq.frames.resize(n * frame_size);
  for (std::size_t i = 0; i < n; ++i)
    extractor.compute(windows[i], std::span<float>(seq.frames).subspan(i * frame_size, frame_size));
  for (float v : seq.frames)
    if (!std::isfinite(v)) fail(ErrorKind::Data, "non-finite mel value in clip ", seq.clip_id);
  return seq;
}

}  // namespace gewild::audio
