// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "eval/predictions.hpp"
#include "model/fusion_model.hpp"
#include "train/features.hpp"
#include "train/trainer.hpp"

namespace gewild::eval {

struct LoadedModel {
  train::TrainConfig config;
  std::unique_ptr<model::FusionModel<float>> model;
};

/// Rebuilds the model described by `<stem>.meta` and loads `<stem>.gewt`.
LoadedModel load_model_checkpoint(const std::filesystem::path& stem);

/// Forward passes over `records` in parallel; the model is only read.
/// Output order follows `records`.
PredictionSet predict(const model::FusionModel<float>& model, const train::FeatureProvider& features,
                      const std::vector<ManifestRecord>& records, std::string model_tag, unsigned workers = 1);

}  // namespace gewild::eval
