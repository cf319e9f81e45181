// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "audio/mel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "common/error.hpp"

namespace gewild::audio {

namespace {
// FFTW's planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_band_edges(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.f_min), hi = hz_to_mel(cfg.f_max);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
  return edges;
}

std::vector<float> mel_filterbank(const MelConfig& cfg) {
  const auto edges = mel_band_edges(cfg);
  const std::size_t bins = cfg.n_bins();
  std::vector<float> fb(cfg.n_mels * bins, 0.0f);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.n_fft);
      double w = 0.0;
      if (f > lo && f <= center)
        w = (f - lo) / (center - lo);
      else if (f > center && f < hi)
        w = (hi - f) / (hi - center);
      fb[m * bins + k] = static_cast<float>(w * norm);
    }
  }
  return fb;
}

struct MelSpectrogram::Plan {
  fftwf_plan plan = nullptr;
};

MelSpectrogram::MelSpectrogram(MelConfig cfg) : cfg_(cfg), plan_(std::make_unique<Plan>()) {
  if (cfg_.n_fft < 2 || cfg_.hop == 0 || cfg_.n_mels == 0)
    fail(ErrorKind::Config, "invalid mel configuration");
  if (cfg_.window_samples <= cfg_.n_fft / 2)
    fail(ErrorKind::Config, "window too short for reflect padding of ", cfg_.n_fft / 2);
  hann_.resize(cfg_.n_fft);
  for (std::size_t i = 0; i < cfg_.n_fft; ++i)
    hann_[i] = static_cast<float>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                       static_cast<double>(cfg_.n_fft)));

  const auto dense = mel_filterbank(cfg_);
  const std::size_t bins = cfg_.n_bins();
  row_start_.resize(cfg_.n_mels);
  row_weights_.resize(cfg_.n_mels);
  for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
    const float* row = dense.data() + m * bins;
    std::size_t first = 0, last = 0;
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      if (row[k] != 0.0f) {
        if (!any) first = k;
        last = k;
        any = true;
      }
    }
    row_start_[m] = first;
    if (any) row_weights_[m].assign(row + first, row + last + 1);
  }

  std::lock_guard lock(planner_mutex());
  float* in = fftwf_alloc_real(cfg_.n_fft);
  fftwf_complex* out = fftwf_alloc_complex(bins);
  plan_->plan = fftwf_plan_dft_r2c_1d(static_cast<int>(cfg_.n_fft), in, out, FFTW_MEASURE);
  fftwf_free(in);
  fftwf_free(out);
  if (!plan_->plan) fail(ErrorKind::Internal, "FFTW planning failed for n_fft=", cfg_.n_fft);
}

MelSpectrogram::~MelSpectrogram() {
  if (plan_ && plan_->plan) {
    std::lock_guard lock(planner_mutex());
    fftwf_destroy_plan(plan_->plan);
  }
}

std::vector<float> MelSpectrogram::power_spectrogram(std::span<const float> window) const {
  if (window.size() != cfg_.window_samples)
    fail(ErrorKind::Dimension, "mel window must have ", cfg_.window_samples, " samples, got ", window.size());
  const std::size_t n = window.size(), pad = cfg_.n_fft / 2, bins = cfg_.n_bins(), frames = cfg_.n_frames();
  // Reflect padding without repeating the edge sample.
  std::vector<float> padded(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    padded[i] = window[pad - i];
    padded[pad + n + i] = window[n - 2 - i];
  }
  std::copy(window.begin(), window.end(), padded.begin() + static_cast<long>(pad));

  float* buf = fftwf_alloc_real(cfg_.n_fft);
  fftwf_complex* spec = fftwf_alloc_complex(bins);
  std::vector<float> power(frames * bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const float* src = padded.data() + t * cfg_.hop;
    for (std::size_t i = 0; i < cfg_.n_fft; ++i) buf[i] = src[i] * hann_[i];
    fftwf_execute_dft_r2c(plan_->plan, buf, spec);
    float* row = power.data() + t * bins;
    for (std::size_t k = 0; k < bins; ++k) row[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
  }
  fftwf_free(buf);
  fftwf_free(spec);
  return power;
}

void MelSpectrogram::compute(std::span<const float> window, std::span<float> out) const {
  const std::size_t frames = cfg_.n_frames(), bins = cfg_.n_bins();
  if (out.size() != cfg_.n_mels * frames)
    fail(ErrorKind::Dimension, "mel output buffer needs ", cfg_.n_mels * frames, " values, got ", out.size());
  const auto power = power_spectrogram(window);
  for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
    const auto& w = row_weights_[m];
    const std::size_t k0 = row_start_[m];
    float* dst = out.data() + m * frames;
    for (std::size_t t = 0; t < frames; ++t) {
      const float* p = power.data() + t * bins + k0;
      float acc = 0.0f;
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * p[i];
      dst[t] = std::log(acc + cfg_.log_floor);
    }
  }
}

std::vector<float> MelSpectrogram::compute(std::span<const float> window) const {
  std::vector<float> out(cfg_.n_mels * cfg_.n_frames());
  compute(window, out);
  return out;
}

std::vector<float> mel_spectrogram(std::span<const float> window) {
  thread_local const MelSpectrogram extractor;
  return extractor.compute(window);
}

}  // namespace gewild::audio
