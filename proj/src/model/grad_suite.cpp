// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/grad_suite.hpp"

#include <memory>

#include "model/fusion_model.hpp"

namespace gewild::model {

namespace {

using D = nn::BasicTensor<double>;

D random_tensor(nn::Shape shape, std::mt19937_64& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(nn::numel(shape));
  for (auto& v : data) v = dist(rng);
  return D(std::move(shape), std::move(data));
}

// Zero biases over dead ReLU regions put pre-activations on the kink, where
// finite differences are meaningless; shift them off it.
void jitter_biases(nn::ParamRefs<double>& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (auto* p : params)
    if (p->name.ends_with(".b") || p->name.ends_with(".beta"))
      for (auto& v : p->tensor.data()) v = jitter(rng);
}

std::vector<D> with_params(std::vector<D> inputs, const nn::ParamRefs<double>& params) {
  for (auto* p : params) inputs.push_back(p->tensor);
  return inputs;
}

ModelConfig tiny_config(Branches b) {
  auto c = ModelConfig::tiny();
  c.n_frames = 2;
  c.branches = b;
  c.seed = 42;
  return c;
}

}  // namespace

std::vector<nn::GradCheckReport> run_gradient_suite(std::uint64_t seed,
                                                    const std::function<void(const nn::GradCheckReport&)>& on_report) {
  std::vector<nn::GradCheckReport> out;
  std::mt19937_64 rng(seed);
  auto emit = [&](nn::GradCheckReport r) {
    if (on_report) on_report(r);
    out.push_back(std::move(r));
  };
  using In = std::vector<D>&;

  emit(nn::grad_check("matmul", [](In in) { return nn::matmul(in[0], in[1]); },
                      {random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 3}, rng)}));
  emit(nn::grad_check("conv2d", [](In in) { return nn::conv2d(in[0], in[1], in[2], {2, 1}); },
                      {random_tensor({2, 2, 7, 6}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)}));
  emit(nn::grad_check("maxpool2d", [](In in) { return nn::maxpool2d(in[0]); }, {random_tensor({1, 2, 4, 5}, rng)}));
  emit(nn::grad_check("relu", [](In in) { return nn::relu(in[0]); }, {random_tensor({4, 5}, rng)}));
  emit(nn::grad_check("gelu", [](In in) { return nn::gelu(in[0]); }, {random_tensor({4, 5}, rng)}));
  emit(nn::grad_check("layernorm", [](In in) { return nn::layernorm(in[0], in[1], in[2]); },
                      {random_tensor({3, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)}));
  emit(nn::grad_check("softmax", [](In in) { return nn::softmax(in[0], -1); }, {random_tensor({4, 3}, rng)}));
  {
    const std::vector<int> labels{2, 0, 1};
    emit(nn::grad_check("cross_entropy", [labels](In in) { return nn::cross_entropy(in[0], labels); },
                        {random_tensor({3, 3}, rng, 2.0)}));
  }
  {
    auto lin = std::make_shared<nn::Linear<double>>(5, 3, rng);
    nn::ParamRefs<double> ps;
    lin->collect("linear", ps);
    jitter_biases(ps, rng);
    emit(nn::grad_check("linear", [lin](In in) { return (*lin)(in[0]); },
                        with_params({random_tensor({4, 5}, rng)}, ps)));
  }
  {
    auto mha = std::make_shared<nn::MultiHeadAttention<double>>(8, 2, rng);
    nn::ParamRefs<double> ps;
    mha->collect("attention", ps);
    emit(nn::grad_check("multi_head_attention", [mha](In in) { return (*mha)(in[0], in[1], in[1]).output; },
                        with_params({random_tensor({2, 3, 8}, rng), random_tensor({2, 4, 8}, rng)}, ps)));
  }
  {
    auto block = std::make_shared<nn::VitBlock<double>>(8, 2, 16, rng);
    nn::ParamRefs<double> ps;
    block->collect("vit_block", ps);
    jitter_biases(ps, rng);
    emit(nn::grad_check("vit_block", [block](In in) { return (*block)(in[0]); },
                        with_params({random_tensor({2, 3, 8}, rng)}, ps)));
  }
  {
    auto enc = std::make_shared<nn::EncoderLayer<double>>(8, 2, 16, rng);
    nn::ParamRefs<double> ps;
    enc->collect("encoder", ps);
    jitter_biases(ps, rng);
    emit(nn::grad_check("encoder_layer", [enc](In in) { return (*enc)(in[0]); },
                        with_params({random_tensor({1, 4, 8}, rng)}, ps)));
  }
  {
    auto cnn = std::make_shared<nn::CnnBlock<double>>(2, 3, rng);
    nn::ParamRefs<double> ps;
    cnn->collect("cnn_block", ps);
    jitter_biases(ps, rng);
    emit(nn::grad_check("cnn_block", [cnn](In in) { return (*cnn)(in[0]); },
                        with_params({random_tensor({2, 2, 6, 7}, rng)}, ps)));
  }

  nn::GradCheckOptions sampled;
  sampled.max_samples_per_input = 6;
  for (const char* branches : {"audio", "video", "video,audio"}) {
    auto m = std::make_shared<FusionModel<double>>(tiny_config(Branches::parse(branches)));
    auto params = m->parameters();
    jitter_biases(params, rng);
    auto clips = std::make_shared<std::vector<ClipTensors<double>>>();
    for (int i = 0; i < 2; ++i)
      clips->push_back({random_tensor({2, 3, kImageSize, kImageSize}, rng), random_tensor({2, kMelRows, kMelCols}, rng, 3.0)});
    const std::vector<int> labels{0, 2};
    emit(nn::grad_check(
        std::string("tiny_model[") + branches + "]",
        [m, clips, labels](In) { return nn::cross_entropy(m->batch_logits({&(*clips)[0], &(*clips)[1]}), labels); },
        with_params({}, params), sampled));
  }
  return out;
}

}  // namespace gewild::model
