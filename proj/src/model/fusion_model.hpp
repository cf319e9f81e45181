// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Two-branch group emotion classifier. The video branch embeds every frame
// independently with a ViT and projects the class token to d_model. The audio
// branch runs a CNN stack over each log-mel image, projects to d_model, adds
// fixed positional encodings over the frame sequence and applies one
// transformer encoder layer. With both branches active, audio queries attend
// over video keys/values; the three per-frame embeddings are concatenated,
// averaged over frames and classified.

#pragma once

#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "model/config.hpp"
#include "nn/layers.hpp"

namespace gewild::model {

using nn::BasicTensor;

template <typename T>
struct ClipTensors {
  BasicTensor<T> frames;  // [n, 3, 224, 224]
  BasicTensor<T> mels;    // [n, 128, 251]
};

template <typename T>
struct ForwardResult {
  BasicTensor<T> video;          // [n, d] when the video branch is active
  BasicTensor<T> audio;          // [n, d] when the audio branch is active
  BasicTensor<T> cross;          // [n, d] when both are active
  BasicTensor<T> cross_weights;  // [1, heads, n, n]
  BasicTensor<T> fused;          // [1, classifier width]
  BasicTensor<T> logits;         // [1, classes]
  BasicTensor<T> probs;          // [1, classes]
};

template <typename T>
class VideoBranch {
 public:
  VideoBranch() = default;
  VideoBranch(const ModelConfig& cfg, std::mt19937_64& rng)
      : patch_(cfg.vit.patch_size), hidden_(cfg.vit.hidden), tokens_(cfg.patch_tokens()) {
    const std::size_t patch_dim = 3 * patch_ * patch_;
    patch_embed_ = nn::Linear<T>(patch_dim, hidden_, rng);
    cls_ = nn::make_param<T>("cls", nn::uniform_init<T>({1, 1, hidden_}, 0.02, rng));
    pos_ = nn::make_param<T>("pos", nn::uniform_init<T>({1, tokens_ + 1, hidden_}, 0.02, rng));
    for (std::size_t i = 0; i < cfg.vit.depth; ++i)
      blocks_.emplace_back(hidden_, cfg.vit.heads, cfg.vit.mlp_dim, rng);
    norm_ = nn::LayerNorm<T>(hidden_);
    proj_ = nn::Linear<T>(hidden_, cfg.d_model, rng);
  }

  /// [n,3,224,224] -> [n,d]; frames never interact.
  BasicTensor<T> operator()(const BasicTensor<T>& frames) const {
    if (frames.rank() != 4 || frames.dim(1) != 3 || frames.dim(2) != kImageSize || frames.dim(3) != kImageSize)
      fail(ErrorKind::Dimension, "video branch expects [n,3,224,224], got ", nn::shape_str(frames.shape()));
    const std::size_t n = frames.dim(0), grid = kImageSize / patch_;
    auto patches = nn::reshape(
        nn::permute(nn::reshape(frames, {n, 3, grid, patch_, grid, patch_}), {0, 2, 4, 1, 3, 5}),
        {n, tokens_, 3 * patch_ * patch_});
    auto x = patch_embed_(patches);  // [n, tokens, hidden]
    x = nn::concat<T>({nn::concat<T>(std::vector<BasicTensor<T>>(n, cls_.tensor), 0), x}, 1);
    x = nn::add(x, pos_.tensor);
    for (const auto& b : blocks_) x = b(x);
    auto cls_out = nn::reshape(nn::slice(norm_(x), 1, 0, 1), {n, hidden_});
    return proj_(cls_out);
  }

  void collect_into(nn::ParamRefs<T>& out) {
    patch_embed_.collect("video.vit.patch_embed", out);
    cls_.name = "video.vit.cls";
    pos_.name = "video.vit.pos";
    out.push_back(&cls_);
    out.push_back(&pos_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect("video.vit.block" + std::to_string(i), out);
    norm_.collect("video.vit.norm", out);
    proj_.collect("video.proj", out);
  }

 private:
  std::size_t patch_ = 14, hidden_ = 0, tokens_ = 0;
  nn::Linear<T> patch_embed_;
  nn::Parameter<T> cls_, pos_;
  std::vector<nn::VitBlock<T>> blocks_;
  nn::LayerNorm<T> norm_;
  nn::Linear<T> proj_;
};

template <typename T>
class AudioBranch {
 public:
  AudioBranch() = default;
  AudioBranch(const ModelConfig& cfg, std::mt19937_64& rng) : d_(cfg.d_model) {
    std::size_t in = 1;
    for (std::size_t c : cfg.audio_cnn_channels) {
      blocks_.emplace_back(in, c, rng);
      in = c;
    }
    flatten_ = cfg.audio_flatten_width();
    proj_ = nn::Linear<T>(flatten_, d_, rng);
    encoder_ = nn::EncoderLayer<T>(d_, cfg.encoder_heads, cfg.encoder_ff, rng);
  }

  /// Per-frame CNN embedding before the sequence encoder: [n,128,251] -> [n,d].
  BasicTensor<T> frame_embeddings(const BasicTensor<T>& mels) const {
    if (mels.rank() != 3 || mels.dim(1) != kMelRows || mels.dim(2) != kMelCols)
      fail(ErrorKind::Dimension, "audio branch expects [n,128,251], got ", nn::shape_str(mels.shape()));
    const std::size_t n = mels.dim(0);
    auto x = nn::reshape(mels, {n, 1, kMelRows, kMelCols});
    for (const auto& b : blocks_) x = b(x);
    return proj_(nn::reshape(x, {n, flatten_}));
  }

  /// [n,128,251] -> [n,d].
  BasicTensor<T> operator()(const BasicTensor<T>& mels) const {
    auto emb = frame_embeddings(mels);
    const std::size_t n = emb.dim(0);
    emb = nn::add(emb, nn::sinusoidal_positional_encoding<T>(n, d_));
    return nn::reshape(encoder_(nn::reshape(emb, {1, n, d_})), {n, d_});
  }

  void collect_into(nn::ParamRefs<T>& out) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect("audio.cnn.block" + std::to_string(i), out);
    proj_.collect("audio.proj", out);
    encoder_.collect("audio.encoder", out);
  }

 private:
  std::size_t d_ = 0, flatten_ = 0;
  std::vector<nn::CnnBlock<T>> blocks_;
  nn::Linear<T> proj_;
  nn::EncoderLayer<T> encoder_;
};

/// Concatenates per-frame embeddings along features, averages over frames:
/// k tensors of [n,d] -> [1, k*d].
template <typename T>
BasicTensor<T> fuse_frames(const std::vector<BasicTensor<T>>& embeddings) {
  if (embeddings.empty()) fail(ErrorKind::Config, "no embeddings to fuse");
  const std::size_t n = embeddings[0].dim(0);
  for (const auto& e : embeddings)
    if (e.rank() != 2 || e.dim(0) != n)
      fail(ErrorKind::Dimension, "fusion inputs disagree on frame count: ", nn::shape_str(e.shape()), " vs n=", n);
  auto cat = embeddings.size() == 1 ? embeddings[0] : nn::concat<T>(embeddings, 1);
  const std::size_t width = cat.dim(1);
  return nn::reshape(nn::mean(cat, 0), {1, width});
}

template <typename T>
class FusionModel {
 public:
  explicit FusionModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::mt19937_64 rng(cfg_.seed);
    if (cfg_.branches.video) video_ = VideoBranch<T>(cfg_, rng);
    if (cfg_.branches.audio) audio_ = AudioBranch<T>(cfg_, rng);
    if (cfg_.branches.both()) cross_ = nn::MultiHeadAttention<T>(cfg_.d_model, cfg_.cross_heads, rng);
    classifier_ = nn::Linear<T>(cfg_.classifier_width(), cfg_.classes, rng);
    check_unique_names();
  }

  FusionModel(const FusionModel&) = delete;
  FusionModel& operator=(const FusionModel&) = delete;

  const ModelConfig& config() const { return cfg_; }

  /// Deterministic order: video, audio, cross-attention, classifier.
  nn::ParamRefs<T> parameters() {
    nn::ParamRefs<T> out;
    if (cfg_.branches.video) video_.collect_into(out);
    if (cfg_.branches.audio) audio_.collect_into(out);
    if (cfg_.branches.both()) cross_.collect("fusion.cross", out);
    classifier_.collect("fusion.classifier", out);
    return out;
  }

  /// Parameters of the pretrained backbone (everything under video.vit).
  nn::ParamRefs<T> vit_parameters() {
    nn::ParamRefs<T> out;
    for (auto* p : parameters())
      if (p->name.rfind("video.vit.", 0) == 0) out.push_back(p);
    return out;
  }

  void set_vit_frozen(bool frozen) {
    for (auto* p : vit_parameters()) nn::set_frozen(*p, frozen);
  }

  BasicTensor<T> video_forward(const BasicTensor<T>& frames) const {
    require(cfg_.branches.video, "video");
    return video_(frames);
  }

  BasicTensor<T> audio_forward(const BasicTensor<T>& mels) const {
    require(cfg_.branches.audio, "audio");
    return audio_(mels);
  }

  /// Audio queries, video keys and values: [n,d] x [n,d] -> [n,d].
  nn::AttentionResult<T> cross_attention(const BasicTensor<T>& audio_seq, const BasicTensor<T>& video_seq) const {
    if (!cfg_.branches.both()) fail(ErrorKind::Config, "cross-attention needs both branches active");
    if (audio_seq.shape() != video_seq.shape() || audio_seq.rank() != 2)
      fail(ErrorKind::Dimension, "cross-attention length mismatch: audio ", nn::shape_str(audio_seq.shape()),
           " video ", nn::shape_str(video_seq.shape()));
    const std::size_t n = audio_seq.dim(0), d = audio_seq.dim(1);
    auto vid = nn::reshape(video_seq, {1, n, d});
    auto res = cross_(nn::reshape(audio_seq, {1, n, d}), vid, vid);
    res.output = nn::reshape(res.output, {n, d});
    return res;
  }

  /// [1, width] -> logits [1, classes].
  BasicTensor<T> classify(const BasicTensor<T>& fused) const {
    if (fused.rank() != 2 || fused.dim(1) != classifier_.in_features())
      fail(ErrorKind::Dimension, "classifier expects width ", classifier_.in_features(), ", got ",
           nn::shape_str(fused.shape()));
    return classifier_(fused);
  }

  ForwardResult<T> forward(const ClipTensors<T>& clip) const {
    ForwardResult<T> r;
    std::vector<BasicTensor<T>> parts;
    if (cfg_.branches.video) {
      if (!clip.frames.defined()) fail(ErrorKind::Data, "video branch active but clip has no frames");
      r.video = video_(clip.frames);
      parts.push_back(r.video);
    }
    if (cfg_.branches.audio) {
      if (!clip.mels.defined()) fail(ErrorKind::Data, "audio branch active but clip has no mel frames");
      r.audio = audio_(clip.mels);
      parts.push_back(r.audio);
    }
    if (cfg_.branches.both()) {
      if (r.video.dim(0) != r.audio.dim(0))
        fail(ErrorKind::Dimension, "video has ", r.video.dim(0), " frames but audio has ", r.audio.dim(0));
      auto att = cross_attention(r.audio, r.video);
      r.cross = att.output;
      r.cross_weights = att.weights;
      parts.push_back(r.cross);
    }
    r.fused = fuse_frames(parts);
    r.logits = classify(r.fused);
    r.probs = nn::softmax(r.logits, -1);
    return r;
  }

  /// Logits for a batch of clips, stacked to [B, classes].
  BasicTensor<T> batch_logits(const std::vector<const ClipTensors<T>*>& clips) const {
    std::vector<BasicTensor<T>> rows;
    rows.reserve(clips.size());
    for (const auto* c : clips) rows.push_back(forward(*c).logits);
    return rows.size() == 1 ? rows[0] : nn::concat<T>(rows, 0);
  }

 private:
  void require(bool active, const char* what) const {
    if (!active) fail(ErrorKind::Config, what, " branch is not active in this model");
  }

  void check_unique_names() {
    std::unordered_set<std::string> seen;
    for (auto* p : parameters())
      if (!seen.insert(p->name).second) fail(ErrorKind::Internal, "duplicate parameter name ", p->name);
  }

  ModelConfig cfg_;
  VideoBranch<T> video_;
  AudioBranch<T> audio_;
  nn::MultiHeadAttention<T> cross_;
  nn::Linear<T> classifier_;
};

}  // namespace gewild::model
