// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "audio/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "common/error.hpp"
#include "io/archive.hpp"

namespace gewild::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16_at(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t u32_at(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::vector<std::uint8_t> encode(const AudioClip& clip, bool as_float) {
  if (clip.channels < 1 || clip.channels > 2) fail(ErrorKind::Unsupported, "WAV writer supports 1-2 channels");
  const std::uint16_t bits = as_float ? 32 : 16;
  const std::uint32_t block = static_cast<std::uint32_t>(clip.channels) * bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(clip.frames() * block);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, as_float ? kFormatFloat : kFormatPcm);
  put_u16(out, static_cast<std::uint16_t>(clip.channels));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float s : clip.samples) {
    if (as_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    } else {
      const long v = std::lround(std::clamp(s, -1.0f, 1.0f) * 32768.0f);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(v, -32768L, 32767L))));
    }
  }
  return out;
}

}  // namespace

AudioClip parse_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12) fail(ErrorKind::Format, "WAV truncated at byte ", b.size(), " (RIFF header needs 12)");
  if (std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    fail(ErrorKind::Format, "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (true) {
    if (pos + 8 > b.size()) {
      fail(ErrorKind::Format, have_fmt ? "WAV has no data chunk, truncated at byte "
                                       : "WAV has no fmt chunk, truncated at byte ", pos);
    }
    const std::string id(reinterpret_cast<const char*>(b.data() + pos), 4);
    const std::uint32_t size = u32_at(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > b.size()) fail(ErrorKind::Format, "WAV fmt chunk truncated at byte ", body);
      format = u16_at(b, body);
      channels = u16_at(b, body + 2);
      rate = u32_at(b, body + 4);
      bits = u16_at(b, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40 || body + 40 > b.size()) fail(ErrorKind::Format, "WAV extensible fmt truncated at byte ", body);
        format = u16_at(b, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) fail(ErrorKind::Format, "WAV data chunk before fmt chunk at byte ", pos);
      if (body + size > b.size())
        fail(ErrorKind::Format, "WAV data chunk truncated at byte ", b.size(), " (expected ", body + size, ")");
      if (!((format == kFormatPcm && bits == 16) || (format == kFormatFloat && bits == 32)))
        fail(ErrorKind::Unsupported, "unsupported WAV encoding (format ", format, ", ", bits, " bits)");
      if (channels < 1 || channels > 2) fail(ErrorKind::Unsupported, "unsupported WAV channel count ", channels);
      if (rate == 0) fail(ErrorKind::Format, "WAV sample rate is zero");
      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      clip.channels = channels;
      const std::size_t width = bits / 8;
      const std::size_t count = size / (width * channels) * channels;
      clip.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t off = body + i * width;
        if (format == kFormatPcm)
          clip.samples[i] = static_cast<float>(static_cast<std::int16_t>(u16_at(b, off))) / 32768.0f;
        else
          clip.samples[i] = std::bit_cast<float>(u32_at(b, off));
      }
      return clip;
    }
    pos = body + size + (size & 1u);
  }
}

AudioClip load_wav(const std::filesystem::path& path) { return parse_wav(io::read_file_bytes(path)); }

void save_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip) {
  io::write_file_bytes(path, encode(clip, false));
}

void save_wav_float(const std::filesystem::path& path, const AudioClip& clip) {
  io::write_file_bytes(path, encode(clip, true));
}

}  // namespace gewild::audio
