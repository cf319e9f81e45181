// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "model/config.hpp"
#include "model/fusion_model.hpp"
#include "model/weights.hpp"
#include "nn/grad_check.hpp"
#include "test_util.hpp"

namespace gewild::model {
namespace {

using testing::random_tensor;

template <typename T>
nn::Parameter<T>& param(FusionModel<T>& m, const std::string& name) {
  for (auto* p : m.parameters())
    if (p->name == name) return *p;
  throw std::runtime_error("no parameter " + name);
}

template <typename T>
ClipTensors<T> random_clip(std::size_t n, std::mt19937_64& rng) {
  return {random_tensor<T>({n, 3, kImageSize, kImageSize}, rng), random_tensor<T>({n, kMelRows, kMelCols}, rng, 3.0)};
}

ModelConfig tiny(std::size_t n = 2, Branches b = {}) {
  auto c = ModelConfig::tiny();
  c.n_frames = n;
  c.branches = b;
  c.seed = 42;
  return c;
}

TEST(Config, PresetsValidateAndArithmetic) {
  for (const char* name : {"paper", "desk", "tiny"}) EXPECT_NO_THROW(ModelConfig::preset(name).validate());
  auto paper = ModelConfig::paper();
  EXPECT_EQ(paper.patch_tokens(), 256u);
  EXPECT_EQ(paper.pooled_mel_shape(), (std::pair<std::size_t, std::size_t>{8, 15}));
  EXPECT_EQ(paper.audio_flatten_width(), 128u * 8 * 15);
  EXPECT_EQ(paper.classifier_width(), 3 * 1024u);
  EXPECT_EQ(paper.encoder_ff, 2 * paper.d_model);
}

TEST(Config, InvalidConfigsRejected) {
  auto bad_patch = ModelConfig::desk();
  bad_patch.vit.patch_size = 15;
  EXPECT_THROW(bad_patch.validate(), Error);
  auto bad_ff = ModelConfig::desk();
  bad_ff.encoder_ff = 100;
  EXPECT_THROW(bad_ff.validate(), Error);
  auto bad_heads = ModelConfig::desk();
  bad_heads.encoder_heads = 3;
  EXPECT_THROW(bad_heads.validate(), Error);
  EXPECT_THROW(Branches::parse(""), Error);
  EXPECT_EQ(Branches::parse("audio").to_string(), "audio");
}

TEST(Config, KeyValueRoundTripAndHash) {
  auto c = ModelConfig::desk();
  c.branches = Branches::parse("video");
  c.n_frames = 75;
  auto back = ModelConfig::from_kv(c.to_kv());
  EXPECT_EQ(back.to_kv().serialize(), c.to_kv().serialize());
  EXPECT_EQ(back.hash(), c.hash());
  auto other = c;
  other.d_model = 32;
  other.encoder_ff = 64;
  EXPECT_NE(other.hash(), c.hash());
}

TEST(VideoBranch, DeskShapeAndFrameIndependence) {
  auto cfg = ModelConfig::desk();
  cfg.branches = Branches::parse("video");
  FusionModel<float> m(cfg);
  std::mt19937_64 rng(1);
  auto frames = random_tensor<float>({3, 3, kImageSize, kImageSize}, rng);
  // Frame 2 duplicates frame 0.
  std::copy_n(frames.data().begin(), 3 * kImageSize * kImageSize, frames.data().begin() + 2 * 3 * kImageSize * kImageSize);
  auto out = m.video_forward(frames);
  ASSERT_EQ(out.shape(), (nn::Shape{3, 64}));
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(out[i], out[2 * 64 + i]);

  auto changed = frames.clone();
  for (std::size_t i = 3 * kImageSize * kImageSize; i < 2 * 3 * kImageSize * kImageSize; ++i) changed.data()[i] *= -1;
  auto out2 = m.video_forward(changed);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(out[i], out2[i]);
    EXPECT_EQ(out[128 + i], out2[128 + i]);
  }
}

TEST(AudioBranch, ShapeAndPositionSensitivity) {
  FusionModel<float> m(tiny(3, Branches::parse("audio")));
  std::mt19937_64 rng(2);
  auto mels = random_tensor<float>({3, kMelRows, kMelCols}, rng, 3.0);
  auto out = m.audio_forward(mels);
  ASSERT_EQ(out.shape(), (nn::Shape{3, 8}));
  // Swap frames 0 and 1; without position sensitivity the rows would just swap.
  auto swapped = mels.clone();
  const std::size_t fs = kMelRows * kMelCols;
  std::swap_ranges(swapped.data().begin(), swapped.data().begin() + fs, swapped.data().begin() + fs);
  auto out2 = m.audio_forward(swapped);
  double diff = 0;
  for (std::size_t i = 0; i < 8; ++i) diff += std::abs(out[i] - out2[8 + i]) + std::abs(out[8 + i] - out2[i]);
  EXPECT_GT(diff, 1e-4);
  EXPECT_THROW(m.audio_forward(random_tensor<float>({3, kMelRows, 250}, rng)), Error);
}

TEST(CrossAttention, SingleFrameIsLinearMapOfVideo) {
  FusionModel<double> m(tiny(1));
  std::mt19937_64 rng(3);
  auto audio = random_tensor<double>({1, 8}, rng);
  auto video = random_tensor<double>({1, 8}, rng);
  auto res = m.cross_attention(audio, video);
  EXPECT_EQ(res.weights.numel(), 4u);
  for (double w : res.weights.data()) EXPECT_EQ(w, 1.0);
  auto expected = nn::matmul(nn::matmul(video, param(m, "fusion.cross.wv.w").tensor), param(m, "fusion.cross.wo.w").tensor);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(res.output[i], expected[i], 1e-12);
}

TEST(CrossAttention, IdenticalVideoRowsCollapseValues) {
  FusionModel<float> m(tiny(4));
  std::mt19937_64 rng(4);
  auto audio = random_tensor<float>({4, 8}, rng);
  auto row = random_tensor<float>({1, 8}, rng);
  std::vector<float> rep;
  for (int i = 0; i < 4; ++i) rep.insert(rep.end(), row.data().begin(), row.data().end());
  auto res = m.cross_attention(audio, nn::Tensor({4, 8}, rep));
  for (std::size_t t = 1; t < 4; ++t)
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(res.output[t * 8 + i], res.output[i], 1e-6);
}

// softmax(Q K^T / sqrt(dh)) V per head with explicit loops, then Wo.
std::vector<double> attention_oracle(const std::vector<double>& a, const std::vector<double>& v, std::size_t n,
                                     std::size_t d, std::size_t heads, const nn::BasicTensor<double>& wq,
                                     const nn::BasicTensor<double>& wk, const nn::BasicTensor<double>& wv,
                                     const nn::BasicTensor<double>& wo) {
  auto project = [&](const std::vector<double>& x, const nn::BasicTensor<double>& w) {
    std::vector<double> y(n * d, 0.0);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) y[t * d + j] += x[t * d + i] * w[i * d + j];
    return y;
  };
  const auto q = project(a, wq), k = project(v, wk), val = project(v, wv);
  const std::size_t dh = d / heads;
  std::vector<double> ctx(n * d, 0.0);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(n);
      double mx = -1e300;
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0;
        for (std::size_t c = 0; c < dh; ++c) dot += q[i * d + h * dh + c] * k[j * d + h * dh + c];
        s[j] = dot / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, s[j]);
      }
      double z = 0;
      for (auto& x : s) z += (x = std::exp(x - mx));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < dh; ++c) ctx[i * d + h * dh + c] += s[j] / z * val[j * d + h * dh + c];
    }
  return project(ctx, wo);
}

TEST(CrossAttention, MatchesDirectOracle) {
  FusionModel<double> m(tiny(3));
  std::mt19937_64 rng(5);
  auto audio = random_tensor<double>({3, 8}, rng, 2.0);
  auto video = random_tensor<double>({3, 8}, rng, 2.0);
  auto res = m.cross_attention(audio, video);
  const auto expected = attention_oracle(audio.storage(), video.storage(), 3, 8, 4, param(m, "fusion.cross.wq.w").tensor,
                                         param(m, "fusion.cross.wk.w").tensor, param(m, "fusion.cross.wv.w").tensor,
                                         param(m, "fusion.cross.wo.w").tensor);
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(res.output[i], expected[i], 1e-5);
  EXPECT_THROW(m.cross_attention(audio, random_tensor<double>({2, 8}, rng)), Error);
}

TEST(Fusion, SimplexAndWidths) {
  std::mt19937_64 rng(6);
  const auto clip = random_clip<float>(2, rng);
  for (const char* b : {"video", "audio", "video,audio"}) {
    FusionModel<float> m(tiny(2, Branches::parse(b)));
    auto r = m.forward(clip);
    EXPECT_EQ(r.fused.dim(1), std::string(b) == "video,audio" ? 24u : 8u) << b;
    double total = 0;
    for (float p : r.probs.data()) {
      EXPECT_GT(p, 0.0f);
      EXPECT_LT(p, 1.0f);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(Fusion, ZeroClassifierGivesUniform) {
  FusionModel<float> m(tiny(2));
  for (auto* p : m.parameters())
    if (p->name.rfind("fusion.classifier", 0) == 0) std::fill(p->tensor.data().begin(), p->tensor.data().end(), 0.0f);
  std::mt19937_64 rng(7);
  auto r = m.forward(random_clip<float>(2, rng));
  for (float p : r.probs.data()) EXPECT_NEAR(p, 1.0f / 3.0f, 1e-7);
}

TEST(Fusion, SingleFrameMeanIsIdentity) {
  std::mt19937_64 rng(8);
  auto a = random_tensor<float>({1, 8}, rng), b = random_tensor<float>({1, 8}, rng);
  auto fused = fuse_frames<float>({a, b});
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(fused[i], a[i]);
    EXPECT_EQ(fused[8 + i], b[i]);
  }
  EXPECT_THROW(fuse_frames<float>({a, random_tensor<float>({2, 8}, rng)}), Error);
}

TEST(Fusion, ConcatenationIsolation) {
  FusionModel<float> m(tiny(2));
  std::mt19937_64 rng(9);
  auto clip = random_clip<float>(2, rng);
  auto r1 = m.forward(clip);
  clip.mels = nn::Tensor::zeros(clip.mels.shape());
  auto r2 = m.forward(clip);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(r1.fused[i], r2.fused[i]);
  double diff = 0;
  for (std::size_t i = 8; i < 24; ++i) diff += std::abs(r1.fused[i] - r2.fused[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(Fusion, EndToEndGradientTinyModel) {
  auto m = std::make_shared<FusionModel<double>>(tiny(2));
  std::mt19937_64 rng(10);
  auto c0 = std::make_shared<ClipTensors<double>>(random_clip<double>(2, rng));
  auto c1 = std::make_shared<ClipTensors<double>>(random_clip<double>(2, rng));
  // Zero-initialized biases over dead ReLU regions sit exactly on the kink.
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<nn::BasicTensor<double>> inputs;
  for (auto* p : m->parameters()) {
    if (p->name.ends_with(".b") || p->name.ends_with(".beta"))
      for (auto& v : p->tensor.data()) v = jitter(rng);
    inputs.push_back(p->tensor);
  }
  nn::GradCheckOptions opt;
  opt.max_samples_per_input = 6;
  const std::vector<int> labels{0, 2};
  auto rep = nn::grad_check(
      "fusion_model",
      [=](std::vector<nn::BasicTensor<double>>&) {
        return nn::cross_entropy(m->batch_logits({c0.get(), c1.get()}), labels);
      },
      inputs, opt);
  EXPECT_TRUE(rep.passed(1e-3)) << rep.max_rel_err;
}

TEST(Weights, RoundTripMissingAndShapeConflicts) {
  FusionModel<float> a(tiny(2));
  auto cfg = tiny(2);
  cfg.seed = 99;
  FusionModel<float> b(cfg);
  auto archive = export_weights(a);
  testing::TempDir dir("weights");
  archive.save(dir / "w.gewt");
  auto report = import_weights(b, io::TensorArchive::load(dir / "w.gewt"));
  EXPECT_TRUE(report.missing.empty());
  auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->tensor.storage(), pb[i]->tensor.storage());

  io::TensorArchive partial;
  for (const auto& e : archive.entries())
    if (e.name != "fusion.classifier.b") partial.put(e.name, e.dims, e.data);
  auto rep2 = import_weights(b, partial);
  EXPECT_EQ(rep2.missing, (std::vector<std::string>{"fusion.classifier.b"}));

  io::TensorArchive transposed;
  for (const auto& e : archive.entries()) {
    auto dims = e.dims;
    if (e.name == "fusion.classifier.w") std::swap(dims[0], dims[1]);
    transposed.put(e.name, dims, e.data);
  }
  try {
    import_weights(b, transposed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("fusion.classifier.w"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[24,3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[3,24]"), std::string::npos);
  }

  FusionModel<float> video_only(tiny(2, Branches::parse("video")));
  EXPECT_THROW(import_weights(video_only, archive), Error);
}

TEST(Weights, NameMapRemapsEntries) {
  auto map = parse_name_map("video.proj.w\tbackbone.head.weight\n# comment\n");
  EXPECT_EQ(map.at("video.proj.w"), "backbone.head.weight");
  EXPECT_THROW(parse_name_map("only_one_column\n"), Error);
}

}  // namespace
}  // namespace gewild::model
