// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Differentiable operations. Each op computes its forward value eagerly and,
// when a tape is active and some input requires a gradient, records a closure
// that accumulates input gradients from the output gradient.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "nn/kernels.hpp"
#include "nn/tensor.hpp"

namespace gewild::nn {

namespace detail {

template <typename T>
bool any_requires_grad(std::initializer_list<const BasicTensor<T>*> inputs) {
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T, typename F>
void record(const char* op, std::vector<std::shared_ptr<TensorNode<T>>> inputs,
            BasicTensor<T>& out, F&& backward) {
  Tape<T>* tape = active_tape<T>();
  if (!tape) return;
  bool needed = false;
  for (const auto& n : inputs) needed = needed || n->requires_grad;
  if (!needed) return;
  out.set_requires_grad(true);
  tape->record(op, std::move(inputs), out.node(), std::forward<F>(backward));
}

inline std::size_t normalize_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) fail(ErrorKind::Dimension, "axis ", axis, " out of range for rank ", rank);
  return static_cast<std::size_t>(a);
}

// Splits a shape around `axis` into (outer, len, inner) extents.
inline void split_axis(const Shape& s, std::size_t axis, std::size_t& outer, std::size_t& len,
                       std::size_t& inner) {
  outer = 1;
  inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace detail

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() < 2 || b.rank() < 2) {
    fail(ErrorKind::Dimension, "matmul needs rank >= 2 operands, got ", shape_str(a.shape()),
         " and ", shape_str(b.shape()));
  }
  const std::size_t m = a.dim(-2), k = a.dim(-1), k2 = b.dim(-2), n = b.dim(-1);
  Shape batch_a(a.shape().begin(), a.shape().end() - 2);
  Shape batch_b(b.shape().begin(), b.shape().end() - 2);
  const bool shared_b = batch_b.empty();
  if (k != k2 || (!shared_b && batch_a != batch_b)) {
    fail(ErrorKind::Dimension, "matmul shape mismatch: ", shape_str(a.shape()), " x ",
         shape_str(b.shape()));
  }
  const std::size_t batches = numel(batch_a);
  Shape out_shape = batch_a;
  out_shape.push_back(m);
  out_shape.push_back(n);
  std::vector<T> out_data(batches * m * n, T(0));
  const T* ad = a.data().data();
  const T* bd = b.data().data();
  for (std::size_t bi = 0; bi < batches; ++bi) {
    kernels::gemm_nn(m, k, n, ad + bi * m * k, bd + (shared_b ? 0 : bi * k * n),
                     out_data.data() + bi * m * n);
  }
  BasicTensor<T> out(std::move(out_shape), std::move(out_data));
  auto an = a.node(), bn = b.node(), on = out.node();
  detail::record<T>("matmul", {an, bn}, out, [=] {
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const T* dc = on->grad.data() + bi * m * n;
      const std::size_t boff = shared_b ? 0 : bi * k * n;
      if (an->requires_grad)
        kernels::gemm_nt(m, n, k, dc, bn->data.data() + boff, an->grad.data() + bi * m * k);
      if (bn->requires_grad)
        kernels::gemm_tn(k, m, n, an->data.data() + bi * m * k, dc, bn->grad.data() + boff);
    }
  });
  return out;
}

/// a + b where b's shape, ignoring leading unit dims, is a suffix of a's.
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  Shape bs = b.shape();
  while (bs.size() > 1 && bs.front() == 1) bs.erase(bs.begin());
  if (bs.size() > a.rank() ||
      !std::equal(bs.begin(), bs.end(), a.shape().end() - static_cast<long>(bs.size()))) {
    fail(ErrorKind::Dimension, "add cannot broadcast ", shape_str(b.shape()), " onto ",
         shape_str(a.shape()));
  }
  const std::size_t inner = b.numel();
  const std::size_t outer = a.numel() / inner;
  std::vector<T> out_data(a.numel());
  const T* ad = a.data().data();
  const T* bd = b.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) out_data[o * inner + i] = ad[o * inner + i] + bd[i];
  BasicTensor<T> out(a.shape(), std::move(out_data));
  auto an = a.node(), bn = b.node(), on = out.node();
  detail::record<T>("add", {an, bn}, out, [=] {
    const T* g = on->grad.data();
    if (an->requires_grad)
      for (std::size_t i = 0; i < outer * inner; ++i) an->grad[i] += g[i];
    if (bn->requires_grad)
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) bn->grad[i] += g[o * inner + i];
  });
  return out;
}

/// Elementwise product of equal-shape tensors.
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape())
    fail(ErrorKind::Dimension, "mul shape mismatch: ", shape_str(a.shape()), " vs ", shape_str(b.shape()));
  std::vector<T> out_data(a.numel());
  for (std::size_t i = 0; i < out_data.size(); ++i) out_data[i] = a[i] * b[i];
  BasicTensor<T> out(a.shape(), std::move(out_data));
  auto an = a.node(), bn = b.node(), on = out.node();
  detail::record<T>("mul", {an, bn}, out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i] * bn->data[i];
      if (bn->requires_grad) bn->grad[i] += on->grad[i] * an->data[i];
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s) {
  std::vector<T> out_data(a.numel());
  for (std::size_t i = 0; i < out_data.size(); ++i) out_data[i] = a[i] * s;
  BasicTensor<T> out(a.shape(), std::move(out_data));
  auto an = a.node(), on = out.node();
  detail::record<T>("scale", {an}, out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * s;
  });
  return out;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  std::vector<T> out_data(x.numel());
  for (std::size_t i = 0; i < out_data.size(); ++i) out_data[i] = x[i] > T(0) ? x[i] : T(0);
  BasicTensor<T> out(x.shape(), std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("relu", {xn}, out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i)
      if (xn->data[i] > T(0)) xn->grad[i] += on->grad[i];
  });
  return out;
}

/// tanh approximation of GELU.
template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x) {
  constexpr T c = T(0.7978845608028654);  // sqrt(2/pi)
  constexpr T a = T(0.044715);
  std::vector<T> out_data(x.numel());
  for (std::size_t i = 0; i < out_data.size(); ++i) {
    const T v = x[i];
    out_data[i] = T(0.5) * v * (T(1) + std::tanh(c * (v + a * v * v * v)));
  }
  BasicTensor<T> out(x.shape(), std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("gelu", {xn}, out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      const T v = xn->data[i];
      const T t = std::tanh(c * (v + a * v * v * v));
      const T d = T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * c * (T(1) + T(3) * a * v * v);
      xn->grad[i] += on->grad[i] * d;
    }
  });
  return out;
}

/// Normalizes over the last dimension, then applies gamma/beta.
template <typename T>
BasicTensor<T> layernorm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                         const BasicTensor<T>& beta, T eps = T(1e-5)) {
  const std::size_t d = x.dim(-1);
  if (gamma.numel() != d || beta.numel() != d)
    fail(ErrorKind::Dimension, "layernorm affine size ", gamma.numel(), " does not match last dim of ",
         shape_str(x.shape()));
  const std::size_t rows = x.numel() / d;
  std::vector<T> out_data(x.numel());
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data().data() + r * d;
    T mean = T(0);
    for (std::size_t i = 0; i < d; ++i) mean += xr[i];
    mean /= static_cast<T>(d);
    T var = T(0);
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t i = 0; i < d; ++i) {
      const T h = (xr[i] - mean) * rs;
      (*xhat)[r * d + i] = h;
      out_data[r * d + i] = h * gamma[i] + beta[i];
    }
  }
  BasicTensor<T> out(x.shape(), std::move(out_data));
  auto xn = x.node(), gn = gamma.node(), bn = beta.node(), on = out.node();
  detail::record<T>("layernorm", {xn, gn, bn}, out, [=] {
    std::vector<T> dxhat(d);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* g = on->grad.data() + r * d;
      const T* h = xhat->data() + r * d;
      T mean_dh = T(0), mean_dh_h = T(0);
      for (std::size_t i = 0; i < d; ++i) {
        dxhat[i] = g[i] * gn->data[i];
        mean_dh += dxhat[i];
        mean_dh_h += dxhat[i] * h[i];
        if (gn->requires_grad) gn->grad[i] += g[i] * h[i];
        if (bn->requires_grad) bn->grad[i] += g[i];
      }
      if (!xn->requires_grad) continue;
      mean_dh /= static_cast<T>(d);
      mean_dh_h /= static_cast<T>(d);
      const T rs = (*rstd)[r];
      for (std::size_t i = 0; i < d; ++i)
        xn->grad[r * d + i] += rs * (dxhat[i] - mean_dh - h[i] * mean_dh_h);
    }
  });
  return out;
}

/// Max-subtracted softmax along `axis`.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x, int axis = -1) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank());
  std::size_t outer, len, inner;
  detail::split_axis(x.shape(), ax, outer, len, inner);
  std::vector<T> y(x.numel());
  const T* xd = x.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, xd[base + i * inner]);
      T sum = T(0);
      for (std::size_t i = 0; i < len; ++i) {
        const T e = std::exp(xd[base + i * inner] - mx);
        y[base + i * inner] = e;
        sum += e;
      }
      for (std::size_t i = 0; i < len; ++i) y[base + i * inner] /= sum;
    }
  }
  BasicTensor<T> out(x.shape(), std::move(y));
  auto xn = x.node(), on = out.node();
  detail::record<T>("softmax", {xn}, out, [=] {
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        T dot = T(0);
        for (std::size_t i = 0; i < len; ++i)
          dot += on->grad[base + i * inner] * on->data[base + i * inner];
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t idx = base + i * inner;
          xn->grad[idx] += on->data[idx] * (on->grad[idx] - dot);
        }
      }
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  if (numel(shape) != x.numel())
    fail(ErrorKind::Dimension, "cannot reshape ", shape_str(x.shape()), " to ", shape_str(shape));
  BasicTensor<T> out(std::move(shape), x.storage());
  auto xn = x.node(), on = out.node();
  detail::record<T>("reshape", {xn}, out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
  });
  return out;
}

/// out.shape[i] = x.shape[perm[i]]
template <typename T>
BasicTensor<T> permute(const BasicTensor<T>& x, const std::vector<std::size_t>& perm) {
  const std::size_t r = x.rank();
  if (perm.size() != r) fail(ErrorKind::Dimension, "permute rank mismatch for ", shape_str(x.shape()));
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * x.shape()[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_strides(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (perm[i] >= r) fail(ErrorKind::Dimension, "bad permutation index ", perm[i]);
    out_shape[i] = x.shape()[perm[i]];
    src_strides[i] = in_strides[perm[i]];
  }
  const std::size_t n = x.numel();
  // map[out_index] = in_index
  auto map = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < n; ++o) {
    (*map)[o] = src;
    for (std::size_t d = r; d-- > 0;) {
      ++idx[d];
      src += src_strides[d];
      if (idx[d] < out_shape[d]) break;
      src -= src_strides[d] * idx[d];
      idx[d] = 0;
    }
  }
  std::vector<T> out_data(n);
  for (std::size_t o = 0; o < n; ++o) out_data[o] = x[(*map)[o]];
  BasicTensor<T> out(std::move(out_shape), std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("permute", {xn}, out, [=] {
    for (std::size_t o = 0; o < on->grad.size(); ++o) xn->grad[(*map)[o]] += on->grad[o];
  });
  return out;
}

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, int axis) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat of zero tensors");
  const std::size_t ax = detail::normalize_axis(axis, parts[0].rank());
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    Shape a = p.shape(), b = parts[0].shape();
    if (a.size() != b.size()) fail(ErrorKind::Dimension, "concat rank mismatch");
    a[ax] = b[ax] = 0;
    if (a != b)
      fail(ErrorKind::Dimension, "concat shape mismatch: ", shape_str(p.shape()), " vs ",
           shape_str(parts[0].shape()));
    out_shape[ax] += p.shape()[ax];
  }
  std::size_t outer, len, inner;
  detail::split_axis(out_shape, ax, outer, len, inner);
  std::vector<T> out_data(numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t chunk = p.shape()[ax] * inner;
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(p.data().data() + o * chunk, chunk, out_data.data() + o * len * inner + off);
    off += chunk;
  }
  BasicTensor<T> out(std::move(out_shape), std::move(out_data));
  std::vector<std::shared_ptr<TensorNode<T>>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  auto on = out.node();
  detail::record<T>("concat", nodes, out, [=] {
    for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
      auto& pn = nodes[pi];
      if (!pn->requires_grad) continue;
      const std::size_t chunk = pn->shape[ax] * inner;
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < chunk; ++i)
          pn->grad[o * chunk + i] += on->grad[o * len * inner + offsets[pi] + i];
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> slice(const BasicTensor<T>& x, int axis, std::size_t start, std::size_t count) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank());
  std::size_t outer, len, inner;
  detail::split_axis(x.shape(), ax, outer, len, inner);
  if (count == 0 || start + count > len)
    fail(ErrorKind::Dimension, "slice [", start, ",", start + count, ") out of range for ", shape_str(x.shape()));
  Shape out_shape = x.shape();
  out_shape[ax] = count;
  std::vector<T> out_data(outer * count * inner);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(x.data().data() + (o * len + start) * inner, count * inner,
                out_data.data() + o * count * inner);
  BasicTensor<T> out(std::move(out_shape), std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("slice", {xn}, out, [=] {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < count * inner; ++i)
        xn->grad[(o * len + start) * inner + i] += on->grad[o * count * inner + i];
  });
  return out;
}

/// Mean along `axis`; the axis is removed (rank-1 input yields shape [1]).
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x, int axis) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank());
  std::size_t outer, len, inner;
  detail::split_axis(x.shape(), ax, outer, len, inner);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<long>(ax));
  if (out_shape.empty()) out_shape = {1};
  std::vector<T> out_data(outer * inner, T(0));
  const T inv = T(1) / static_cast<T>(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t in = 0; in < inner; ++in)
        out_data[o * inner + in] += x[(o * len + i) * inner + in];
    for (std::size_t in = 0; in < inner; ++in) out_data[o * inner + in] *= inv;
  }
  BasicTensor<T> out(std::move(out_shape), std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("mean", {xn}, out, [=] {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t in = 0; in < inner; ++in)
          xn->grad[(o * len + i) * inner + in] += on->grad[o * inner + in] * inv;
  });
  return out;
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  T acc = T(0);
  for (T v : x.data()) acc += v;
  BasicTensor<T> out({1}, {acc});
  auto xn = x.node(), on = out.node();
  detail::record<T>("sum", {xn}, out, [=] {
    for (auto& g : xn->grad) g += on->grad[0];
  });
  return out;
}

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                      Conv2dOptions opt = {}) {
  if (x.rank() != 4 || w.rank() != 4)
    fail(ErrorKind::Dimension, "conv2d expects [B,C,H,W] input and [O,C,kh,kw] kernel, got ",
         shape_str(x.shape()), " and ", shape_str(w.shape()));
  const std::size_t batch = x.dim(0), out_ch = w.dim(0);
  kernels::ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), w.dim(2), w.dim(3),
                          opt.stride, opt.padding, 0, 0};
  if (w.dim(1) != g.channels)
    fail(ErrorKind::Dimension, "conv2d channel mismatch: input ", shape_str(x.shape()), " kernel ",
         shape_str(w.shape()));
  if (bias.numel() != out_ch) fail(ErrorKind::Dimension, "conv2d bias size ", bias.numel(), " != ", out_ch);
  if (g.stride == 0) fail(ErrorKind::Config, "conv2d stride must be positive");
  if (g.kh > g.height + 2 * g.pad || g.kw > g.width + 2 * g.pad)
    fail(ErrorKind::Dimension, "conv2d kernel ", shape_str(w.shape()), " larger than padded input ",
         shape_str(x.shape()));
  g.out_h = (g.height + 2 * g.pad - g.kh) / g.stride + 1;
  g.out_w = (g.width + 2 * g.pad - g.kw) / g.stride + 1;
  const std::size_t patch = g.channels * g.kh * g.kw;
  const std::size_t cols = g.out_h * g.out_w;
  const std::size_t in_sz = g.channels * g.height * g.width;
  std::vector<T> out_data(batch * out_ch * cols);
  std::vector<T> col(patch * cols);
  for (std::size_t b = 0; b < batch; ++b) {
    kernels::im2col(g, x.data().data() + b * in_sz, col.data());
    T* ob = out_data.data() + b * out_ch * cols;
    for (std::size_t o = 0; o < out_ch; ++o) std::fill_n(ob + o * cols, cols, bias[o]);
    kernels::gemm_nn(out_ch, patch, cols, w.data().data(), col.data(), ob);
  }
  BasicTensor<T> out({batch, out_ch, g.out_h, g.out_w}, std::move(out_data));
  auto xn = x.node(), wn = w.node(), bn = bias.node(), on = out.node();
  detail::record<T>("conv2d", {xn, wn, bn}, out, [=] {
    std::vector<T> colb(patch * cols);
    std::vector<T> dcol(patch * cols);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* go = on->grad.data() + b * out_ch * cols;
      if (bn->requires_grad)
        for (std::size_t o = 0; o < out_ch; ++o)
          for (std::size_t c = 0; c < cols; ++c) bn->grad[o] += go[o * cols + c];
      if (wn->requires_grad) {
        kernels::im2col(g, xn->data.data() + b * in_sz, colb.data());
        kernels::gemm_nt(out_ch, cols, patch, go, colb.data(), wn->grad.data());
      }
      if (xn->requires_grad) {
        std::fill(dcol.begin(), dcol.end(), T(0));
        kernels::gemm_tn(patch, out_ch, cols, wn->data.data(), go, dcol.data());
        kernels::col2im(g, dcol.data(), xn->grad.data() + b * in_sz);
      }
    }
  });
  return out;
}

/// Window maxima; gradient goes to the first maximal element of each window.
template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x, std::size_t k = 2, std::size_t stride = 2) {
  if (x.rank() != 4) fail(ErrorKind::Dimension, "maxpool2d expects [B,C,H,W], got ", shape_str(x.shape()));
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < k || w < k) fail(ErrorKind::Dimension, "maxpool2d window ", k, " larger than ", shape_str(x.shape()));
  const std::size_t oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;
  std::vector<T> out_data(planes * oh * ow);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out_data.size());
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.data().data() + p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * stride) * w + ox * stride;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t idx = (oy * stride + i) * w + ox * stride + j;
            if (src[idx] > src[best]) best = idx;
          }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out_data[o] = src[best];
        (*argmax)[o] = p * h * w + best;
      }
    }
  }
  BasicTensor<T> out({x.dim(0), x.dim(1), oh, ow}, std::move(out_data));
  auto xn = x.node(), on = out.node();
  detail::record<T>("maxpool2d", {xn}, out, [=] {
    for (std::size_t o = 0; o < on->grad.size(); ++o) xn->grad[(*argmax)[o]] += on->grad[o];
  });
  return out;
}

/// Mean negative log-likelihood of `labels` under softmax(logits), computed
/// through a fused log-softmax.
template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) fail(ErrorKind::Dimension, "cross_entropy expects [B,C] logits, got ", shape_str(logits.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) fail(ErrorKind::Dimension, "cross_entropy: ", labels.size(), " labels for batch ", batch);
  auto probs = std::make_shared<std::vector<T>>(logits.numel());
  T loss = T(0);
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      fail(ErrorKind::Data, "label ", label, " out of range [0,", classes, ") for record ", b);
    const T* row = logits.data().data() + b * classes;
    const T mx = *std::max_element(row, row + classes);
    T sum = T(0);
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    const T log_z = mx + std::log(sum);
    for (std::size_t c = 0; c < classes; ++c) (*probs)[b * classes + c] = std::exp(row[c] - log_z);
    loss += log_z - row[label];
  }
  loss /= static_cast<T>(batch);
  BasicTensor<T> out({1}, {loss});
  std::vector<int> lab(labels.begin(), labels.end());
  auto ln = logits.node(), on = out.node();
  detail::record<T>("cross_entropy", {ln}, out, [=] {
    const T g = on->grad[0] / static_cast<T>(batch);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < classes; ++c) {
        const T target = static_cast<int>(c) == lab[b] ? T(1) : T(0);
        ln->grad[b * classes + c] += g * ((*probs)[b * classes + c] - target);
      }
  });
  return out;
}

/// Fixed sinusoidal table: PE(p, 2i) = sin(p / 10000^(2i/d)), PE(p, 2i+1) = cos(same).
template <typename T>
BasicTensor<T> sinusoidal_positional_encoding(std::size_t length, std::size_t d) {
  if (d == 0 || d % 2 != 0) fail(ErrorKind::Config, "positional encoding width must be even, got ", d);
  if (length == 0) fail(ErrorKind::Config, "positional encoding length must be positive");
  std::vector<T> data(length * d);
  for (std::size_t pos = 0; pos < length; ++pos)
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double angle = static_cast<double>(pos) /
                           std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
      data[pos * d + 2 * i] = static_cast<T>(std::sin(angle));
      data[pos * d + 2 * i + 1] = static_cast<T>(std::cos(angle));
    }
  return BasicTensor<T>({length, d}, std::move(data));
}

}  // namespace gewild::nn
