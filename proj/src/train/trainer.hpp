// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "common/kv.hpp"
#include "common/manifest.hpp"
#include "model/fusion_model.hpp"
#include "train/features.hpp"

namespace gewild::train {

struct TrainConfig {
  model::ModelConfig model = model::ModelConfig::desk();
  double lr = 1e-5;
  std::size_t freeze_epochs = 10;
  std::size_t epochs = 40;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  std::size_t prefetch = 8;  // clips loaded ahead of the optimizer
  unsigned workers = 2;      // feature loading threads; 0 loads inline

  /// lr = 0 is accepted so a run can be replayed without updates.
  void validate() const;
  /// Model keys plus lr, freeze_epochs, epochs, batch_size, seed. The
  /// loader-only keys (prefetch, workers) are kept out of the hash.
  KeyValues to_kv() const;
  /// Unknown keys are rejected so typos do not silently fall back.
  static TrainConfig from_kv(const KeyValues& kv);
  std::uint64_t hash() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  bool vit_frozen = false;
};

struct SplitScore {
  double loss = 0.0;
  double accuracy = 0.0;
};

class Trainer {
 public:
  /// With a non-empty `out_dir`, every epoch appends to metrics.tsv and
  /// refreshes the `last` checkpoint; `best` tracks the highest validation
  /// accuracy.
  Trainer(TrainConfig cfg, const FeatureProvider& features, std::vector<ManifestRecord> train,
          std::vector<ManifestRecord> val = {}, std::filesystem::path out_dir = {});

  model::FusionModel<float>& model() { return *model_; }
  const TrainConfig& config() const { return cfg_; }
  std::size_t next_epoch() const { return epoch_; }
  double best_val_accuracy() const { return best_val_; }

  EpochMetrics run_epoch();
  /// Runs until the configured epoch count or until `on_epoch` returns false.
  std::vector<EpochMetrics> run(const std::function<bool(const EpochMetrics&)>& on_epoch = {});

  SplitScore evaluate(const std::vector<ManifestRecord>& records);

  /// Writes `<stem>.gewt` and `<stem>.meta`.
  void save_checkpoint(const std::filesystem::path& stem) const;
  /// Restores parameters, epoch counter and shuffle state. A checkpoint
  /// written under a different config is refused unless `force`.
  void load_checkpoint(const std::filesystem::path& stem, bool force = false);

 private:
  void log_metrics(const EpochMetrics& m) const;

  TrainConfig cfg_;
  const FeatureProvider& features_;
  std::vector<ManifestRecord> train_, val_;
  std::filesystem::path out_;
  std::unique_ptr<model::FusionModel<float>> model_;
  std::mt19937_64 rng_;
  std::size_t epoch_ = 0;
  double best_val_ = -1.0;
};

}  // namespace gewild::train
