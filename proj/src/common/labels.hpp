// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>

#include "common/error.hpp"

namespace gewild {

inline constexpr int kNumClasses = 3;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"negative", "neutral", "positive"};

inline int parse_label(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[static_cast<std::size_t>(i)] == name) return i;
  fail(ErrorKind::Data, "unknown class label '", std::string(name), "' (negative, neutral, positive)");
}

inline std::string label_name(int label) {
  if (label < 0 || label >= kNumClasses) fail(ErrorKind::Data, "class index ", label, " out of range");
  return std::string(kClassNames[static_cast<std::size_t>(label)]);
}

}  // namespace gewild
