// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common/manifest.hpp"
#include "eval/predictions.hpp"

namespace gewild::eval {

using Truth = std::map<std::string, int>;

/// id -> label; duplicate ids are an error.
Truth truth_from_records(const std::vector<ManifestRecord>& records);

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;  // [truth][pred]

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  Confusion confusion{};
  std::array<std::optional<double>, kNumClasses> precision;  // empty when the class is never predicted
  std::array<std::optional<double>, kNumClasses> recall;     // empty when the class never occurs
};

/// Every predicted id must appear in `truth`; extra truth ids are ignored so
/// a full manifest can score one split. Empty sets are an error.
Confusion confusion(const PredictionSet& pred, const Truth& truth);
double accuracy(const PredictionSet& pred, const Truth& truth);
EvalReport evaluate(const PredictionSet& pred, const Truth& truth);

/// Fraction of clips with the same predicted class. Both sets must cover
/// the same ids; the error lists what each side lacks.
double prediction_agreement(const PredictionSet& a, const PredictionSet& b);

std::string format_report(const EvalReport& report);
/// `metric,class,value` rows for plotting.
std::string report_csv(const EvalReport& report);

}  // namespace gewild::eval
