// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/config.hpp"

#include <sstream>

#include "common/error.hpp"

namespace gewild::model {

std::string Branches::to_string() const {
  if (video && audio) return "video,audio";
  if (video) return "video";
  if (audio) return "audio";
  return "";
}

Branches Branches::parse(const std::string& text) {
  Branches b{false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "video")
      b.video = true;
    else if (item == "audio")
      b.audio = true;
    else if (!item.empty())
      fail(ErrorKind::Config, "unknown branch '", item, "' (expected video and/or audio)");
  }
  if (!b.video && !b.audio) fail(ErrorKind::Config, "no active branch");
  return b;
}

ModelConfig ModelConfig::paper() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.d_model = 64;
  c.vit = {14, 2, 64, 4, 128};
  c.encoder_ff = 128;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.d_model = 8;
  c.vit = {56, 1, 8, 2, 16};
  c.audio_cnn_channels = {2, 2, 2, 2};
  c.encoder_ff = 16;
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  if (name == "tiny") return tiny();
  fail(ErrorKind::Config, "unknown model preset '", name, "' (paper, desk, tiny)");
}

void ModelConfig::validate() const {
  if (vit.patch_size == 0 || kImageSize % vit.patch_size != 0)
    fail(ErrorKind::Config, "patch size ", vit.patch_size, " does not divide ", kImageSize);
  if (d_model == 0 || encoder_heads == 0 || d_model % encoder_heads != 0)
    fail(ErrorKind::Config, "d_model ", d_model, " not divisible by encoder heads ", encoder_heads);
  if (cross_heads == 0 || d_model % cross_heads != 0)
    fail(ErrorKind::Config, "d_model ", d_model, " not divisible by cross-attention heads ", cross_heads);
  if (encoder_ff != 2 * d_model)
    fail(ErrorKind::Config, "encoder feed-forward width ", encoder_ff, " must be 2*d_model = ", 2 * d_model);
  if (d_model % 2 != 0) fail(ErrorKind::Config, "d_model must be even for the positional encoding");
  if (vit.heads == 0 || vit.hidden % vit.heads != 0)
    fail(ErrorKind::Config, "ViT hidden ", vit.hidden, " not divisible by ", vit.heads, " heads");
  if (vit.depth == 0 || vit.mlp_dim == 0) fail(ErrorKind::Config, "ViT depth and MLP width must be positive");
  if (audio_cnn_channels.empty()) fail(ErrorKind::Config, "audio CNN needs at least one block");
  for (auto c : audio_cnn_channels)
    if (c == 0) fail(ErrorKind::Config, "audio CNN channel counts must be positive");
  const auto [r, c] = pooled_mel_shape();
  if (r == 0 || c == 0) fail(ErrorKind::Config, "too many CNN blocks for a ", kMelRows, "x", kMelCols, " input");
  if (n_frames == 0) fail(ErrorKind::Config, "n_frames must be >= 1");
  if (classes < 2) fail(ErrorKind::Config, "need at least two classes");
  if (!branches.video && !branches.audio) fail(ErrorKind::Config, "no active branch");
}

std::pair<std::size_t, std::size_t> ModelConfig::pooled_mel_shape() const {
  std::size_t r = kMelRows, c = kMelCols;
  for (std::size_t i = 0; i < audio_cnn_channels.size(); ++i) {
    r /= 2;
    c /= 2;
  }
  return {r, c};
}

std::size_t ModelConfig::audio_flatten_width() const {
  const auto [r, c] = pooled_mel_shape();
  return audio_cnn_channels.back() * r * c;
}

std::size_t ModelConfig::classifier_width() const { return branches.both() ? 3 * d_model : d_model; }

KeyValues ModelConfig::to_kv() const {
  KeyValues kv;
  auto s = [](std::size_t v) { return std::to_string(v); };
  kv.set("d_model", s(d_model));
  kv.set("n_frames", s(n_frames));
  kv.set("vit.patch_size", s(vit.patch_size));
  kv.set("vit.depth", s(vit.depth));
  kv.set("vit.hidden", s(vit.hidden));
  kv.set("vit.heads", s(vit.heads));
  kv.set("vit.mlp_dim", s(vit.mlp_dim));
  std::string ch;
  for (std::size_t i = 0; i < audio_cnn_channels.size(); ++i) ch += (i ? "," : "") + s(audio_cnn_channels[i]);
  kv.set("audio_cnn_channels", ch);
  kv.set("encoder_heads", s(encoder_heads));
  kv.set("encoder_ff", s(encoder_ff));
  kv.set("cross_heads", s(cross_heads));
  kv.set("classes", s(classes));
  kv.set("branches", branches.to_string());
  return kv;
}

ModelConfig ModelConfig::from_kv(const KeyValues& kv) {
  ModelConfig c = preset(kv.get_or("preset", "desk"));
  auto size = [&](const char* key, std::size_t& field) {
    if (kv.has(key)) {
      const auto v = kv.get_int(key);
      if (v < 0) fail(ErrorKind::Config, "key '", key, "' must be non-negative");
      field = static_cast<std::size_t>(v);
    }
  };
  size("d_model", c.d_model);
  size("n_frames", c.n_frames);
  size("vit.patch_size", c.vit.patch_size);
  size("vit.depth", c.vit.depth);
  size("vit.hidden", c.vit.hidden);
  size("vit.heads", c.vit.heads);
  size("vit.mlp_dim", c.vit.mlp_dim);
  size("encoder_heads", c.encoder_heads);
  size("cross_heads", c.cross_heads);
  size("classes", c.classes);
  if (kv.has("d_model") && !kv.has("encoder_ff")) c.encoder_ff = 2 * c.d_model;
  size("encoder_ff", c.encoder_ff);
  if (kv.has("audio_cnn_channels")) c.audio_cnn_channels = kv.get_size_list("audio_cnn_channels");
  if (kv.has("branches")) c.branches = Branches::parse(kv.get("branches"));
  if (kv.has("seed")) c.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
  c.validate();
  return c;
}

std::uint64_t ModelConfig::hash() const { return fnv1a(to_kv().serialize()); }

}  // namespace gewild::model
