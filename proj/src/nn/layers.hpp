// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "nn/ops.hpp"

namespace gewild::nn {

template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> tensor;
  bool frozen = false;
};

template <typename T>
using ParamRefs = std::vector<Parameter<T>*>;

/// Frozen parameters also stop recording gradients, so backward skips them.
template <typename T>
void set_frozen(Parameter<T>& p, bool frozen) {
  p.frozen = frozen;
  p.tensor.set_requires_grad(!frozen);
  if (frozen) p.tensor.zero_grad();
}

template <typename T>
BasicTensor<T> uniform_init(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> data(numel(shape));
  for (auto& v : data) v = static_cast<T>(dist(rng));
  return BasicTensor<T>(std::move(shape), std::move(data), true);
}

template <typename T>
Parameter<T> make_param(std::string name, BasicTensor<T> t) {
  t.set_requires_grad(true);
  return Parameter<T>{std::move(name), std::move(t), false};
}

/// y = x W + b with W stored as [in, out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, std::mt19937_64& rng, bool bias = true) : has_bias_(bias) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    weight_ = make_param<T>("w", uniform_init<T>({in, out}, bound, rng));
    if (bias) bias_ = make_param<T>("b", BasicTensor<T>::zeros({out}, true));
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    auto y = matmul(x, weight_.tensor);
    return has_bias_ ? add(y, bias_.tensor) : y;
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    weight_.name = prefix + ".w";
    out.push_back(&weight_);
    if (has_bias_) {
      bias_.name = prefix + ".b";
      out.push_back(&bias_);
    }
  }

  std::size_t in_features() const { return weight_.tensor.dim(0); }
  std::size_t out_features() const { return weight_.tensor.dim(1); }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
  bool has_bias_ = true;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t d)
      : gamma_(make_param<T>("gamma", BasicTensor<T>::full({d}, T(1), true))),
        beta_(make_param<T>("beta", BasicTensor<T>::zeros({d}, true))) {}

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    return layernorm(x, gamma_.tensor, beta_.tensor);
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    gamma_.name = prefix + ".gamma";
    beta_.name = prefix + ".beta";
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

 private:
  Parameter<T> gamma_;
  Parameter<T> beta_;
};

template <typename T>
struct AttentionResult {
  BasicTensor<T> output;   // [B, Tq, d]
  BasicTensor<T> weights;  // [B, heads, Tq, Tk]
};

/// Scaled dot-product attention over `heads` subspaces with bias-free
/// projections Wq, Wk, Wv and output projection Wo.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t d, std::size_t heads, std::mt19937_64& rng) : d_(d), heads_(heads) {
    if (heads == 0 || d % heads != 0)
      fail(ErrorKind::Config, "attention width ", d, " not divisible by ", heads, " heads");
    wq_ = Linear<T>(d, d, rng, false);
    wk_ = Linear<T>(d, d, rng, false);
    wv_ = Linear<T>(d, d, rng, false);
    wo_ = Linear<T>(d, d, rng, false);
  }

  AttentionResult<T> operator()(const BasicTensor<T>& q, const BasicTensor<T>& k,
                                const BasicTensor<T>& v) const {
    if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3 || q.dim(2) != d_ || k.dim(2) != d_ ||
        v.dim(2) != d_ || q.dim(0) != k.dim(0) || k.shape() != v.shape()) {
      fail(ErrorKind::Dimension, "attention input mismatch: q ", shape_str(q.shape()), " k ",
           shape_str(k.shape()), " v ", shape_str(v.shape()), " (d=", d_, ")");
    }
    const std::size_t b = q.dim(0), tq = q.dim(1), tk = k.dim(1), dh = d_ / heads_;
    auto split = [&](const BasicTensor<T>& x, std::size_t t) {
      return permute(reshape(x, {b, t, heads_, dh}), {0, 2, 1, 3});  // [B,h,T,dh]
    };
    auto qh = split(wq_(q), tq);
    auto kh_t = permute(reshape(wk_(k), {b, tk, heads_, dh}), {0, 2, 3, 1});  // [B,h,dh,Tk]
    auto vh = split(wv_(v), tk);
    auto scores = scale(matmul(qh, kh_t), T(1) / std::sqrt(static_cast<T>(dh)));
    auto weights = softmax(scores, -1);
    auto ctx = matmul(weights, vh);  // [B,h,Tq,dh]
    auto merged = reshape(permute(ctx, {0, 2, 1, 3}), {b, tq, d_});
    return {wo_(merged), weights};
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    wq_.collect(prefix + ".wq", out);
    wk_.collect(prefix + ".wk", out);
    wv_.collect(prefix + ".wv", out);
    wo_.collect(prefix + ".wo", out);
  }

  std::size_t heads() const { return heads_; }

 private:
  std::size_t d_ = 0;
  std::size_t heads_ = 1;
  Linear<T> wq_, wk_, wv_, wo_;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(std::size_t d, std::size_t hidden, std::mt19937_64& rng)
      : fc1_(d, hidden, rng), fc2_(hidden, d, rng) {}

  BasicTensor<T> operator()(const BasicTensor<T>& x) const { return fc2_(gelu(fc1_(x))); }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    fc1_.collect(prefix + ".fc1", out);
    fc2_.collect(prefix + ".fc2", out);
  }

 private:
  Linear<T> fc1_, fc2_;
};

/// Pre-norm block as used by ViT: x + MHA(LN(x)), then x + MLP(LN(x)).
template <typename T>
class VitBlock {
 public:
  VitBlock() = default;
  VitBlock(std::size_t d, std::size_t heads, std::size_t mlp, std::mt19937_64& rng)
      : norm1_(d), attn_(d, heads, rng), norm2_(d), mlp_(d, mlp, rng) {}

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    auto h = norm1_(x);
    auto y = add(x, attn_(h, h, h).output);
    return add(y, mlp_(norm2_(y)));
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    norm1_.collect(prefix + ".norm1", out);
    attn_.collect(prefix + ".attn", out);
    norm2_.collect(prefix + ".norm2", out);
    mlp_.collect(prefix + ".mlp", out);
  }

 private:
  LayerNorm<T> norm1_;
  MultiHeadAttention<T> attn_;
  LayerNorm<T> norm2_;
  FeedForward<T> mlp_;
};

/// Post-norm transformer encoder layer: LN(x + MHA(x)), then LN(y + FF(y)).
template <typename T>
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(std::size_t d, std::size_t heads, std::size_t ff, std::mt19937_64& rng)
      : attn_(d, heads, rng), norm1_(d), ff_(d, ff, rng), norm2_(d) {}

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    auto y = norm1_(add(x, attn_(x, x, x).output));
    return norm2_(add(y, ff_(y)));
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    attn_.collect(prefix + ".attn", out);
    norm1_.collect(prefix + ".norm1", out);
    ff_.collect(prefix + ".ff", out);
    norm2_.collect(prefix + ".norm2", out);
  }

 private:
  MultiHeadAttention<T> attn_;
  LayerNorm<T> norm1_;
  FeedForward<T> ff_;
  LayerNorm<T> norm2_;
};

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t padding, std::mt19937_64& rng)
      : padding_(padding) {
    const double fan_in = static_cast<double>(in * kernel * kernel);
    weight_ = make_param<T>("w", uniform_init<T>({out, in, kernel, kernel}, std::sqrt(6.0 / fan_in), rng));
    bias_ = make_param<T>("b", BasicTensor<T>::zeros({out}, true));
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    return conv2d(x, weight_.tensor, bias_.tensor, {1, padding_});
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    weight_.name = prefix + ".w";
    bias_.name = prefix + ".b";
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
  std::size_t padding_ = 0;
};

/// conv3x3 -> relu -> conv3x3 -> relu -> maxpool 2x2.
template <typename T>
class CnnBlock {
 public:
  CnnBlock() = default;
  CnnBlock(std::size_t in, std::size_t out, std::mt19937_64& rng)
      : conv0_(in, out, 3, 1, rng), conv1_(out, out, 3, 1, rng) {}

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    return maxpool2d(relu(conv1_(relu(conv0_(x)))), 2, 2);
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    conv0_.collect(prefix + ".conv0", out);
    conv1_.collect(prefix + ".conv1", out);
  }

 private:
  Conv2d<T> conv0_, conv1_;
};

/// Plain SGD: p <- p - lr * grad for trainable parameters, then clears every
/// gradient. Frozen parameters are left untouched.
template <typename T>
void sgd_step(const ParamRefs<T>& params, T lr) {
  for (auto* p : params) {
    if (p->frozen) continue;
    if (!p->tensor.has_grad())
      fail(ErrorKind::Internal, "parameter ", p->name, " has no gradient at optimizer step");
  }
  for (auto* p : params) {
    if (!p->frozen && lr != T(0)) {
      auto data = p->tensor.data();
      auto grad = p->tensor.grad();
      for (std::size_t i = 0; i < data.size(); ++i) data[i] -= lr * grad[i];
    }
    p->tensor.zero_grad();
  }
}

}  // namespace gewild::nn
