// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nn/ops.hpp"

namespace gewild::nn {

struct GradCheckOptions {
  double epsilon = 1e-6;
  // Denominator floor for the relative error so that gradients which are
  // zero up to rounding do not blow up the ratio.
  double abs_floor = 1e-6;
  // Per-input cap on checked elements; 0 checks everything.
  std::size_t max_samples_per_input = 0;
  std::uint64_t seed = 7;
};

struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::vector<double> rel_errors;

  bool passed(double tolerance) const { return checked > 0 && max_rel_err <= tolerance; }
};

/// Compares reverse-mode gradients against central finite differences in
/// double precision. The output of `f` is contracted against a fixed random
/// projection so every output element contributes to the scalar objective.
///
/// `inputs` are handles: `f` may ignore its argument and read the same
/// storage through captured parameters.
template <typename F>
GradCheckReport grad_check(std::string name, F&& f, std::vector<BasicTensor<double>> inputs,
                           const GradCheckOptions& opt = {}) {
  using T = double;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }

  BasicTensor<T> projection;
  auto objective = [&](bool with_tape, Tape<T>* tape) {
    auto out = f(inputs);
    if (!projection.defined()) {
      std::vector<T> w(out.numel());
      for (auto& v : w) v = unit(rng);
      projection = BasicTensor<T>(out.shape(), std::move(w));
    }
    if (with_tape) {
      auto loss = sum(mul(out, projection));
      tape->backward(loss);
      return loss.item();
    }
    T acc = 0;
    for (std::size_t i = 0; i < out.numel(); ++i) acc += out[i] * projection[i];
    return acc;
  };

  {
    Tape<T> tape;
    GradScope<T> scope(tape);
    objective(true, &tape);
  }

  GradCheckReport report;
  report.name = std::move(name);
  for (auto& in : inputs) {
    std::vector<T> analytic(in.grad().begin(), in.grad().end());
    if (analytic.size() != in.numel()) analytic.assign(in.numel(), T(0));
    std::vector<std::size_t> idx(in.numel());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opt.max_samples_per_input && idx.size() > opt.max_samples_per_input) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opt.max_samples_per_input);
      std::sort(idx.begin(), idx.end());
    }
    auto data = in.data();
    for (std::size_t i : idx) {
      const T saved = data[i];
      data[i] = saved + opt.epsilon;
      const T up = objective(false, nullptr);
      data[i] = saved - opt.epsilon;
      const T down = objective(false, nullptr);
      data[i] = saved;
      const T numeric = (up - down) / (2 * opt.epsilon);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), opt.abs_floor});
      const double err = std::abs(analytic[i] - numeric) / denom;
      report.rel_errors.push_back(err);
      report.max_rel_err = std::max(report.max_rel_err, err);
      ++report.checked;
    }
    in.zero_grad();
  }
  return report;
}

}  // namespace gewild::nn
