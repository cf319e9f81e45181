// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "common/manifest.hpp"

namespace gewild::train {

/// Synthetic clips needed so they make up fraction `ratio` of the mix:
/// round-half-up of n_real * ratio / (1 - ratio).
std::size_t compute_mix_counts(std::size_t n_real, double ratio);

struct MixPlan {
  double ratio = 0.0;
  std::size_t n_real = 0;
  std::size_t n_synth = 0;
  std::array<std::size_t, 3> quotas{};  // per class, following the pool's proportions
  std::uint64_t seed = 0;
};

MixPlan plan_mix(std::size_t n_real, const std::vector<ManifestRecord>& synth_pool, double ratio, std::uint64_t seed);

/// Every real record once plus a class-stratified sample of the synthetic
/// pool, shuffled deterministically.
std::vector<ManifestRecord> build_mixed_dataset(const std::vector<ManifestRecord>& real,
                                                const std::vector<ManifestRecord>& synth_pool, double ratio,
                                                std::uint64_t seed);

}  // namespace gewild::train
