// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nn/grad_check.hpp"

namespace gewild::model {

/// Finite-difference checks over every layer type and the tiny model end to
/// end, all in double precision. `on_report` sees each result as it lands.
std::vector<nn::GradCheckReport> run_gradient_suite(
    std::uint64_t seed = 1, const std::function<void(const nn::GradCheckReport&)>& on_report = {});

}  // namespace gewild::model
