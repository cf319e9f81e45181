// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "audio/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "common/error.hpp"

namespace gewild::audio {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double t, double half_span, double beta) {
  const double r = t / half_span;
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, beta);
}

}  // namespace

PolyphaseResampler::PolyphaseResampler(int input_rate, int output_rate) {
  if (input_rate <= 0 || output_rate <= 0) fail(ErrorKind::Config, "resampler rates must be positive");
  const int g = std::gcd(input_rate, output_rate);
  up_ = output_rate / g;
  down_ = input_rate / g;
  // Cutoff at the lower Nyquist, expressed in cycles per upsampled sample.
  const double cutoff = 0.5 / static_cast<double>(std::max(up_, down_));
  const double half_span = static_cast<double>(kTapsPerPhase / 2) * up_;
  taps_.resize(static_cast<std::size_t>(up_) * kTapsPerPhase);
  for (int p = 0; p < up_; ++p) {
    double total = 0.0;
    std::vector<double> phase(kTapsPerPhase);
    for (int m = 0; m < kTapsPerPhase; ++m) {
      // Input sample i0 - (m - half) sits (p + (m - half) * up) upsampled samples back.
      const double offset = p + static_cast<double>(m - kTapsPerPhase / 2) * up_;
      phase[m] = 2.0 * cutoff * sinc(2.0 * cutoff * offset) * kaiser(offset, half_span, kKaiserBeta);
      total += phase[m];
    }
    for (int m = 0; m < kTapsPerPhase; ++m)
      taps_[static_cast<std::size_t>(p) * kTapsPerPhase + m] = static_cast<float>(phase[m] / total);
  }
}

std::vector<float> PolyphaseResampler::process(std::span<const float> input) const {
  const std::size_t n_in = input.size();
  if (n_in == 0) return {};
  const std::size_t n_out = (n_in * static_cast<std::size_t>(up_) + down_ - 1) / static_cast<std::size_t>(down_);
  std::vector<float> out(n_out);
  const long half = kTapsPerPhase / 2;
  for (std::size_t j = 0; j < n_out; ++j) {
    const std::size_t pos = j * static_cast<std::size_t>(down_);
    const long i0 = static_cast<long>(pos / static_cast<std::size_t>(up_));
    const std::size_t p = pos % static_cast<std::size_t>(up_);
    const float* h = taps_.data() + p * kTapsPerPhase;
    double acc = 0.0;
    for (long m = 0; m < kTapsPerPhase; ++m) {
      const long i = i0 - (m - half);
      if (i >= 0 && i < static_cast<long>(n_in)) acc += static_cast<double>(h[m]) * input[static_cast<std::size_t>(i)];
    }
    out[j] = static_cast<float>(acc);
  }
  return out;
}

AudioClip resample_16k(const AudioClip& clip) {
  if (clip.sample_rate == kTargetRate) return clip;
  if (clip.sample_rate < 8000 || clip.sample_rate > 48000)
    fail(ErrorKind::Config, "unsupported sample rate ", clip.sample_rate, " Hz (accepted 8000-48000)");
  PolyphaseResampler rs(clip.sample_rate, kTargetRate);
  AudioClip out;
  out.sample_rate = kTargetRate;
  out.channels = clip.channels;
  if (clip.channels == 1) {
    out.samples = rs.process(clip.samples);
    return out;
  }
  const std::size_t frames = clip.frames();
  const auto ch = static_cast<std::size_t>(clip.channels);
  std::vector<std::vector<float>> planes(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    std::vector<float> plane(frames);
    for (std::size_t i = 0; i < frames; ++i) plane[i] = clip.samples[i * ch + c];
    planes[c] = rs.process(plane);
  }
  out.samples.resize(planes[0].size() * ch);
  for (std::size_t i = 0; i < planes[0].size(); ++i)
    for (std::size_t c = 0; c < ch; ++c) out.samples[i * ch + c] = planes[c][i];
  return out;
}

}  // namespace gewild::audio
