// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gewild::audio {

struct MelConfig {
  int sample_rate = 16000;
  std::size_t window_samples = 16000;  // one second
  std::size_t n_fft = 1024;
  std::size_t hop = 64;
  std::size_t n_mels = 128;
  double f_min = 0.0;
  double f_max = 8000.0;
  float log_floor = 1e-10f;

  std::size_t n_bins() const { return n_fft / 2 + 1; }
  /// Centered framing: 1 + window / hop.
  std::size_t n_frames() const { return 1 + window_samples / hop; }
};

/// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Band edges f_0 < f_1 < ... < f_{n_mels+1}, equally spaced in mel.
std::vector<double> mel_band_edges(const MelConfig& cfg);

/// Dense [n_mels][n_bins] triangular filterbank, each filter scaled by
/// 2 / (f_hi - f_lo) so the filters have equal area.
std::vector<float> mel_filterbank(const MelConfig& cfg);

/// Log-mel image for one window: centered STFT (reflect padding n_fft/2),
/// periodic Hann window, power spectrum, mel projection, log(S + floor).
/// Output is row-major [n_mels][n_frames].
class MelSpectrogram {
 public:
  explicit MelSpectrogram(MelConfig cfg = {});
  ~MelSpectrogram();
  MelSpectrogram(const MelSpectrogram&) = delete;
  MelSpectrogram& operator=(const MelSpectrogram&) = delete;

  const MelConfig& config() const { return cfg_; }

  std::vector<float> compute(std::span<const float> window) const;
  void compute(std::span<const float> window, std::span<float> out) const;

  /// Power spectrum [n_frames][n_bins] before the mel projection.
  std::vector<float> power_spectrogram(std::span<const float> window) const;

 private:
  struct Plan;
  MelConfig cfg_;
  std::vector<float> hann_;
  // Sparse filterbank: per mel row, the first bin and its weights.
  std::vector<std::size_t> row_start_;
  std::vector<std::vector<float>> row_weights_;
  std::unique_ptr<Plan> plan_;
};

/// 128x251 log-mel image of a 16000-sample window with the default config.
std::vector<float> mel_spectrogram(std::span<const float> window);

}  // namespace gewild::audio
