// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "train/mix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "common/labels.hpp"
#include "common/rng.hpp"

namespace gewild::train {

std::size_t compute_mix_counts(std::size_t n_real, double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) fail(ErrorKind::Config, "synthetic ratio must lie in [0, 1), got ", ratio);
  return static_cast<std::size_t>(std::floor(static_cast<double>(n_real) * ratio / (1.0 - ratio) + 0.5));
}

MixPlan plan_mix(std::size_t n_real, const std::vector<ManifestRecord>& synth_pool, double ratio, std::uint64_t seed) {
  MixPlan plan;
  plan.ratio = ratio;
  plan.n_real = n_real;
  plan.n_synth = compute_mix_counts(n_real, ratio);
  plan.seed = seed;
  if (plan.n_synth > synth_pool.size())
    fail(ErrorKind::Config, "synthetic pool has ", synth_pool.size(), " clips but ratio ", ratio, " needs ",
         plan.n_synth, " (short by ", plan.n_synth - synth_pool.size(), ")");
  if (plan.n_synth == 0) return plan;

  std::array<std::size_t, 3> have{};
  for (const auto& r : synth_pool) ++have.at(static_cast<std::size_t>(r.label));
  // Largest remainder; ties go to the lower class index.
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double exact = static_cast<double>(plan.n_synth) * static_cast<double>(have[c]) / static_cast<double>(synth_pool.size());
    plan.quotas[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(plan.quotas[c]);
    assigned += plan.quotas[c];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < plan.n_synth; ++i) {
    const std::size_t c = order[i % 3];
    if (plan.quotas[c] < have[c]) {
      ++plan.quotas[c];
      ++assigned;
    }
  }
  return plan;
}

std::vector<ManifestRecord> build_mixed_dataset(const std::vector<ManifestRecord>& real,
                                                const std::vector<ManifestRecord>& synth_pool, double ratio,
                                                std::uint64_t seed) {
  const auto plan = plan_mix(real.size(), synth_pool, ratio, seed);
  std::vector<ManifestRecord> out(real);
  std::mt19937_64 rng(mix_seed(seed));
  for (int label = 0; label < kNumClasses; ++label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < synth_pool.size(); ++i)
      if (synth_pool[i].label == label) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(plan.quotas[static_cast<std::size_t>(label)]);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) out.push_back(synth_pool[i]);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace gewild::train
