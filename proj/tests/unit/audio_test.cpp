// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <random>

#include "audio/frontend.hpp"
#include "audio/mel.hpp"
#include "audio/resample.hpp"
#include "audio/wav.hpp"
#include "common/error.hpp"
#include "test_util.hpp"

namespace gewild::audio {
namespace {

using Bytes = std::vector<std::uint8_t>;

void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_tag(Bytes& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

Bytes wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                const Bytes& payload) {
  Bytes b;
  put_tag(b, "RIFF");
  put32(b, static_cast<std::uint32_t>(36 + payload.size()));
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  put_tag(b, "data");
  put32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

Bytes pcm16(const std::vector<std::int16_t>& values) {
  Bytes b;
  for (auto v : values) put16(b, static_cast<std::uint16_t>(v));
  return b;
}

TEST(Wav, Pcm16Scale) {
  auto clip = parse_wav(wav_bytes(1, 1, 16000, 16, pcm16({0x7FFF, 0, -32768})));
  EXPECT_EQ(clip.channels, 1);
  EXPECT_EQ(clip.sample_rate, 16000);
  ASSERT_EQ(clip.samples.size(), 3u);
  EXPECT_FLOAT_EQ(clip.samples[0], 32767.0f / 32768.0f);
  EXPECT_NEAR(clip.samples[0], 0.99997f, 1e-5);
  EXPECT_EQ(clip.samples[2], -1.0f);
}

TEST(Wav, StereoPreservedAndFloat) {
  auto stereo = parse_wav(wav_bytes(1, 2, 44100, 16, pcm16({100, -100, 200, -200})));
  EXPECT_EQ(stereo.channels, 2);
  EXPECT_EQ(stereo.frames(), 2u);

  Bytes payload(8);
  const float vals[2] = {0.25f, -0.75f};
  std::memcpy(payload.data(), vals, 8);
  auto f = parse_wav(wav_bytes(3, 1, 16000, 32, payload));
  EXPECT_EQ(f.samples, (std::vector<float>{0.25f, -0.75f}));
}

TEST(Wav, EmptyDataChunkIsFlagged) {
  auto clip = parse_wav(wav_bytes(1, 1, 16000, 16, {}));
  EXPECT_TRUE(clip.empty());
  EXPECT_EQ(clip.frames(), 0u);
}

TEST(Wav, CodecAndTruncationErrors) {
  try {
    parse_wav(wav_bytes(0x55, 1, 16000, 16, pcm16({1, 2})));  // MP3 tag
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
  }
  auto full = wav_bytes(1, 1, 16000, 16, pcm16({1, 2, 3, 4}));
  full.resize(full.size() - 3);
  try {
    parse_wav(full);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(Wav, RoundTripThroughFile) {
  testing::TempDir dir("wav");
  AudioClip clip{{0.5f, -0.25f, 0.0f, 0.125f}, 22050, 2};
  save_wav_float(dir / "f.wav", clip);
  auto back = load_wav(dir / "f.wav");
  EXPECT_EQ(back.samples, clip.samples);
  EXPECT_EQ(back.sample_rate, 22050);
  save_wav_pcm16(dir / "p.wav", clip);
  auto back16 = load_wav(dir / "p.wav");
  for (std::size_t i = 0; i < clip.samples.size(); ++i) EXPECT_NEAR(back16.samples[i], clip.samples[i], 1.0 / 32768);
}

TEST(Mixdown, MeanOfChannels) {
  AudioClip cancel{{1, -1, 1, -1}, 16000, 2};
  for (float v : mixdown_mono(cancel).samples) EXPECT_EQ(v, 0.0f);
  AudioClip mix{{0.5f, 0.25f}, 16000, 2};
  auto m = mixdown_mono(mix);
  EXPECT_EQ(m.channels, 1);
  EXPECT_FLOAT_EQ(m.samples[0], 0.375f);
  AudioClip mono{{0.1f, 0.2f, 0.3f}, 16000, 1};
  EXPECT_EQ(mixdown_mono(mono).samples, mono.samples);
}

TEST(Resample, IdentityAt16k) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> d(-1, 1);
  AudioClip clip{std::vector<float>(1000), 16000, 1};
  for (auto& v : clip.samples) v = d(rng);
  auto out = resample_16k(clip);
  EXPECT_EQ(out.samples, clip.samples);
}

TEST(Resample, DcPreserved) {
  AudioClip dc{std::vector<float>(48000, 0.5f), 48000, 1};
  auto out = resample_16k(dc);
  EXPECT_EQ(out.sample_rate, 16000);
  EXPECT_EQ(out.samples.size(), 16000u);
  // Skip the filter's edge transient.
  for (std::size_t i = 100; i + 100 < out.samples.size(); ++i) EXPECT_NEAR(out.samples[i], 0.5f, 1e-3);
}

TEST(Resample, SinePeakAtOneKilohertz) {
  const int in_rate = 44100;
  AudioClip sine{std::vector<float>(in_rate), in_rate, 1};
  for (std::size_t i = 0; i < sine.samples.size(); ++i)
    sine.samples[i] = static_cast<float>(std::sin(2 * std::numbers::pi * 1000.0 * static_cast<double>(i) / in_rate));
  auto out = resample_16k(sine);
  ASSERT_GE(out.samples.size(), 16000u);
  // Naive DFT over 4000 samples: bin spacing 4 Hz, 1 kHz is bin 250.
  const std::size_t N = 4000, off = 6000;
  std::size_t best = 0;
  double best_mag = -1;
  for (std::size_t k = 1; k < N / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < N; ++i)
      acc += static_cast<double>(out.samples[off + i]) *
             std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(N));
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  EXPECT_EQ(best, 250u);
}

TEST(Resample, RateOutOfRange) {
  AudioClip clip{std::vector<float>(10), 96000, 1};
  EXPECT_THROW(resample_16k(clip), Error);
}

TEST(Framing, WindowStarts) {
  EXPECT_EQ(window_starts(kClipSamples, 5), (std::vector<std::size_t>{0, 16000, 32000, 48000, 64000}));
  EXPECT_EQ(window_starts(kClipSamples, 1), (std::vector<std::size_t>{0}));
  auto s75 = window_starts(kClipSamples, 75);
  ASSERT_EQ(s75.size(), 75u);
  for (std::size_t k = 0; k < 75; ++k)
    EXPECT_EQ(s75[k], static_cast<std::size_t>(std::llround(static_cast<double>(k) * 64000.0 / 74.0)));
  EXPECT_EQ(s75.back(), 64000u);
  EXPECT_THROW(window_starts(kClipSamples, 0), Error);
}

TEST(Framing, StandardizePadsAndTruncates) {
  AudioClip shortc{std::vector<float>(100, 0.5f), 16000, 1};
  auto s = standardize(shortc);
  EXPECT_EQ(s.samples.size(), kClipSamples);
  EXPECT_EQ(s.samples[99], 0.5f);
  EXPECT_EQ(s.samples[100], 0.0f);
  AudioClip longc{std::vector<float>(2 * 96000, 0.1f), 16000, 2};
  auto l = standardize(longc);
  EXPECT_EQ(l.channels, 1);
  EXPECT_EQ(l.samples.size(), kClipSamples);
}

TEST(Mel, ShapeAndZeroInput) {
  std::vector<float> zeros(kWindowSamples, 0.0f);
  auto m = mel_spectrogram(zeros);
  ASSERT_EQ(m.size(), kMelRows * kMelCols);
  for (float v : m) EXPECT_EQ(v, std::log(1e-10f));
  EXPECT_THROW(mel_spectrogram(std::vector<float>(15999)), Error);
}

TEST(Mel, ToneLandsInContainingBand) {
  std::vector<float> tone(kWindowSamples);
  for (std::size_t i = 0; i < tone.size(); ++i)
    tone[i] = static_cast<float>(std::sin(2 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 16000.0));
  auto m = mel_spectrogram(tone);
  std::size_t best = 0;
  double best_e = -1e300;
  for (std::size_t r = 0; r < kMelRows; ++r) {
    double e = 0;
    for (std::size_t t = 0; t < kMelCols; ++t) e += std::exp(static_cast<double>(m[r * kMelCols + t]));
    if (e > best_e) {
      best_e = e;
      best = r;
    }
  }
  // Band edges from the mel formula, evaluated independently.
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  auto edge = [&](std::size_t i) { return 700.0 * (std::pow(10.0, top * static_cast<double>(i) / 129.0 / 2595.0) - 1.0); };
  EXPECT_LE(edge(best), 1000.0);
  EXPECT_GE(edge(best + 2), 1000.0);
}

// Triangles on the HTK scale, area-normalized, computed independently.
std::vector<double> filterbank_oracle() {
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  std::vector<double> hz(130);
  for (std::size_t i = 0; i < 130; ++i) hz[i] = 700.0 * (std::pow(10.0, top * static_cast<double>(i) / 129.0 / 2595.0) - 1.0);
  std::vector<double> fb(128 * 513);
  for (std::size_t m = 0; m < 128; ++m)
    for (std::size_t k = 0; k < 513; ++k) {
      const double f = 15.625 * static_cast<double>(k);
      const double rise = (f - hz[m]) / (hz[m + 1] - hz[m]);
      const double fall = (hz[m + 2] - f) / (hz[m + 2] - hz[m + 1]);
      fb[m * 513 + k] = std::max(0.0, std::min(rise, fall)) * 2.0 / (hz[m + 2] - hz[m]);
    }
  return fb;
}

TEST(Mel, FilterbankMatchesOracle) {
  const auto fb = mel_filterbank(MelConfig{});
  const auto oracle = filterbank_oracle();
  ASSERT_EQ(fb.size(), oracle.size());
  for (std::size_t i = 0; i < fb.size(); ++i) EXPECT_NEAR(fb[i], oracle[i], 1e-5) << i;
}

TEST(Mel, FilterbankProperties) {
  MelConfig cfg;
  const auto fb = mel_filterbank(cfg);
  const auto edges = mel_band_edges(cfg);
  for (std::size_t k = 0; k < 513; ++k) {
    const double f = 15.625 * static_cast<double>(k);
    if (f <= edges.front() || f >= edges.back()) continue;
    double total = 0;
    for (std::size_t m = 0; m < 128; ++m) total += fb[m * 513 + k];
    EXPECT_GT(total, 0.0) << "bin " << k;
  }
  for (std::size_t m = 0; m < 128; ++m) {
    bool falling = false;
    for (std::size_t k = 0; k < 513; ++k) {
      const float w = fb[m * 513 + k];
      EXPECT_GE(w, 0.0f);
      if (k == 0) continue;
      const float prev = fb[m * 513 + k - 1];
      if (w < prev) falling = true;
      if (falling) EXPECT_LE(w, prev) << "filter " << m << " not unimodal at " << k;
    }
    if (m > 0) EXPECT_GT(edges[m + 1], edges[m]);
  }
}

TEST(Mel, ParsevalOnFrames) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> d(-1, 1);
  std::vector<float> w(kWindowSamples);
  for (auto& v : w) v = d(rng);
  MelSpectrogram mel;
  const auto power = mel.power_spectrogram(w);
  // Rebuild frame t's windowed input and compare time-domain energy.
  for (std::size_t t : {0u, 125u, 250u}) {
    double time_energy = 0;
    for (std::size_t i = 0; i < 1024; ++i) {
      const long pos = static_cast<long>(t * 64 + i) - 512;
      const long n = static_cast<long>(w.size());
      const long idx = pos < 0 ? -pos : pos >= n ? 2 * (n - 1) - pos : pos;
      const double hann = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / 1024.0);
      const double x = w[static_cast<std::size_t>(idx)] * hann;
      time_energy += x * x;
    }
    const float* row = power.data() + t * 513;
    double freq = row[0] + row[512];
    for (std::size_t k = 1; k < 512; ++k) freq += 2.0 * row[k];
    freq /= 1024.0;
    EXPECT_NEAR(freq / time_energy, 1.0, 1e-4) << "frame " << t;
  }
}

TEST(Mel, HannLeakageBound) {
  const std::size_t k0 = 64;  // 1000 Hz
  std::vector<float> tone(kWindowSamples);
  for (std::size_t i = 0; i < tone.size(); ++i)
    tone[i] = static_cast<float>(std::cos(2 * std::numbers::pi * static_cast<double>(k0 * i) / 1024.0));
  MelSpectrogram mel;
  const auto power = mel.power_spectrogram(tone);
  const float* row = power.data() + 125 * 513;
  double total = 0, near = 0;
  for (std::size_t k = 0; k < 513; ++k) {
    total += row[k];
    if (k + 2 >= k0 && k <= k0 + 2) near += row[k];
  }
  EXPECT_GE(near / total, 0.9);
}

TEST(Pipeline, SequenceShapesAndDeterminism) {
  AudioClip silent{std::vector<float>(kClipSamples, 0.0f), 16000, 1};
  auto seq = clip_to_mel_sequence(silent, 5, "s");
  EXPECT_EQ(seq.n, 5u);
  ASSERT_EQ(seq.frames.size(), 5 * kMelRows * kMelCols);
  for (float v : seq.frames) EXPECT_EQ(v, seq.frames[0]);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> d(-0.5f, 0.5f);
  AudioClip noise{std::vector<float>(2 * 44100 * 5), 44100, 2};
  for (auto& v : noise.samples) v = d(rng);
  auto a = clip_to_mel_sequence(noise, 75, "n");
  auto b = clip_to_mel_sequence(noise, 75, "n");
  EXPECT_EQ(a.frames.size(), 75 * kMelRows * kMelCols);
  EXPECT_EQ(a.frames, b.frames);
  for (float v : a.frames) ASSERT_TRUE(std::isfinite(v));
}

}  // namespace
}  // namespace gewild::audio
