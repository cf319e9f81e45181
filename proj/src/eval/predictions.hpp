// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Prediction files:
//   # model=<tag>
//   id  class  p0  p1  p2
// one clip per line, class as an index, probabilities printed with %.9g so
// a write/read/write cycle reproduces the file byte for byte.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "common/labels.hpp"

namespace gewild::eval {

using Probs = std::array<float, kNumClasses>;

struct Prediction {
  std::string id;
  int predicted = 0;
  Probs probs{};
};

struct PredictionSet {
  std::string model_tag;
  std::vector<Prediction> predictions;

  std::size_t size() const { return predictions.size(); }
};

/// Highest probability; ties go to the lowest class index.
int argmax(const Probs& probs);

/// Builds a prediction from a probability vector.
Prediction make_prediction(std::string id, const Probs& probs);

/// Checks unique ids, simplex probabilities (sum 1 within 1e-4) and that
/// each class is the argmax of its probabilities.
void validate(const PredictionSet& set, const std::string& origin = "<predictions>");

std::string format_predictions(const PredictionSet& set);
PredictionSet parse_predictions(const std::string& text, const std::string& origin = "<predictions>");
void write_predictions(const std::filesystem::path& path, const PredictionSet& set);
PredictionSet read_predictions(const std::filesystem::path& path);

}  // namespace gewild::eval
