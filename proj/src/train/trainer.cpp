// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "model/weights.hpp"
#include "train/prefetch.hpp"

namespace gewild::train {
namespace fs = std::filesystem;

void TrainConfig::validate() const {
  model.validate();
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail(ErrorKind::Config, "learning rate must be finite and >= 0, got ", lr);
  if (epochs == 0) fail(ErrorKind::Config, "epochs must be >= 1");
  if (freeze_epochs > epochs)
    fail(ErrorKind::Config, "freeze_epochs ", freeze_epochs, " exceeds epochs ", epochs);
  if (batch_size == 0) fail(ErrorKind::Config, "batch_size must be >= 1");
}

KeyValues TrainConfig::to_kv() const {
  KeyValues kv = model.to_kv();
  std::ostringstream lr_text;
  lr_text.precision(17);
  lr_text << lr;
  kv.set("lr", lr_text.str());
  kv.set("freeze_epochs", std::to_string(freeze_epochs));
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("seed", std::to_string(seed));
  return kv;
}

TrainConfig TrainConfig::from_kv(const KeyValues& kv) {
  static const std::set<std::string> known{
      "preset",        "d_model",      "n_frames",    "vit.patch_size", "vit.depth",       "vit.hidden",
      "vit.heads",     "vit.mlp_dim",  "audio_cnn_channels", "encoder_heads", "encoder_ff", "cross_heads",
      "classes",       "branches",     "seed",        "lr",             "freeze_epochs",   "epochs",
      "batch_size",    "prefetch",     "workers"};
  for (const auto& [key, value] : kv.values())
    if (!known.count(key)) fail(ErrorKind::Config, "unknown config key '", key, "'");
  TrainConfig c;
  c.model = model::ModelConfig::from_kv(kv);
  auto count = [&](const char* key, auto& field) {
    if (!kv.has(key)) return;
    const auto v = kv.get_int(key);
    if (v < 0) fail(ErrorKind::Config, "key '", key, "' must be non-negative");
    field = static_cast<std::remove_reference_t<decltype(field)>>(v);
  };
  if (kv.has("lr")) c.lr = kv.get_double("lr");
  count("freeze_epochs", c.freeze_epochs);
  count("epochs", c.epochs);
  count("batch_size", c.batch_size);
  count("seed", c.seed);
  count("prefetch", c.prefetch);
  count("workers", c.workers);
  c.validate();
  return c;
}

std::uint64_t TrainConfig::hash() const { return fnv1a(to_kv().serialize()); }

Trainer::Trainer(TrainConfig cfg, const FeatureProvider& features, std::vector<ManifestRecord> train,
                 std::vector<ManifestRecord> val, fs::path out_dir)
    : cfg_(std::move(cfg)),
      features_(features),
      train_(std::move(train)),
      val_(std::move(val)),
      out_(std::move(out_dir)),
      rng_(mix_seed(cfg_.seed, 7)) {
  cfg_.validate();
  if (train_.empty()) fail(ErrorKind::Data, "training set is empty");
  cfg_.model.seed = cfg_.seed;
  model_ = std::make_unique<model::FusionModel<float>>(cfg_.model);
  if (!out_.empty()) fs::create_directories(out_);
}

EpochMetrics Trainer::run_epoch() {
  EpochMetrics m;
  m.epoch = epoch_;
  m.vit_frozen = epoch_ < cfg_.freeze_epochs;
  model_->set_vit_frozen(m.vit_frozen);

  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_);

  const auto params = model_->parameters();
  Prefetcher<ClipFeatures> loader(
      order.size(), [&](std::size_t i) { return features_.load(train_[order[i]]); }, cfg_.prefetch, cfg_.workers);

  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg_.batch_size, ++batch) {
    const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
    std::vector<ClipFeatures> clips;
    for (std::size_t i = start; i < end; ++i) clips.push_back(loader.next());
    std::vector<const ClipTensors*> inputs;
    std::vector<int> labels;
    for (const auto& c : clips) {
      inputs.push_back(&c.tensors);
      labels.push_back(c.label);
    }

    nn::Tape<float> tape;
    nn::GradScope<float> scope(tape);
    auto logits = model_->batch_logits(inputs);
    auto loss = nn::cross_entropy(logits, std::span<const int>(labels));
    const double value = loss.item();
    if (!std::isfinite(value))
      fail(ErrorKind::Training, "non-finite loss ", value, " at epoch ", epoch_, " batch ", batch, " (first clip ",
           clips.front().id, ")");
    tape.backward(loss);
    nn::sgd_step(params, static_cast<float>(cfg_.lr));

    loss_sum += value * static_cast<double>(clips.size());
    for (std::size_t b = 0; b < clips.size(); ++b) {
      const float* row = logits.data().data() + b * cfg_.model.classes;
      const auto pred = std::max_element(row, row + cfg_.model.classes) - row;
      correct += pred == labels[b];
    }
  }
  m.train_loss = loss_sum / static_cast<double>(order.size());
  m.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());

  if (!val_.empty()) {
    const auto score = evaluate(val_);
    m.val_loss = score.loss;
    m.val_accuracy = score.accuracy;
  }
  ++epoch_;

  if (!out_.empty()) {
    log_metrics(m);
    if (m.val_accuracy && *m.val_accuracy > best_val_) {
      best_val_ = *m.val_accuracy;
      save_checkpoint(out_ / "best");
    }
    save_checkpoint(out_ / "last");
  } else if (m.val_accuracy) {
    best_val_ = std::max(best_val_, *m.val_accuracy);
  }
  return m;
}

std::vector<EpochMetrics> Trainer::run(const std::function<bool(const EpochMetrics&)>& on_epoch) {
  std::vector<EpochMetrics> out;
  while (epoch_ < cfg_.epochs) {
    out.push_back(run_epoch());
    if (on_epoch && !on_epoch(out.back())) break;
  }
  return out;
}

SplitScore Trainer::evaluate(const std::vector<ManifestRecord>& records) {
  if (records.empty()) fail(ErrorKind::Eval, "cannot evaluate an empty split");
  Prefetcher<ClipFeatures> loader(
      records.size(), [&](std::size_t i) { return features_.load(records[i]); }, cfg_.prefetch, cfg_.workers);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto clip = loader.next();
    auto logits = model_->forward(clip.tensors).logits;
    const int label = clip.label;
    loss_sum += nn::cross_entropy(logits, std::span<const int>(&label, 1)).item();
    const float* row = logits.data().data();
    correct += std::max_element(row, row + cfg_.model.classes) - row == label;
  }
  const auto n = static_cast<double>(records.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

void Trainer::log_metrics(const EpochMetrics& m) const {
  const auto path = out_ / "metrics.tsv";
  const bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) fail(ErrorKind::Io, "cannot append to ", path.string());
  f.precision(9);
  if (fresh) f << "epoch\tsplit\tloss\taccuracy\n";
  f << m.epoch << "\ttrain\t" << m.train_loss << '\t' << m.train_accuracy << '\n';
  if (m.val_accuracy) f << m.epoch << "\tval\t" << *m.val_loss << '\t' << *m.val_accuracy << '\n';
}

void Trainer::save_checkpoint(const fs::path& stem) const {
  auto& model = const_cast<model::FusionModel<float>&>(*model_);
  auto weights = stem;
  weights += ".gewt";
  model::export_weights(model).save(weights);

  KeyValues meta;
  meta.set("epoch", std::to_string(epoch_));
  meta.set("config_hash", std::to_string(cfg_.hash()));
  std::ostringstream rng_state;
  rng_state << rng_;
  meta.set("rng_state", rng_state.str());
  std::ostringstream best;
  best.precision(17);
  best << best_val_;
  meta.set("best_val_accuracy", best.str());
  const auto config = cfg_.to_kv();
  for (const auto& [key, value] : config.values()) meta.set("config." + key, value);
  auto meta_path = stem;
  meta_path += ".meta";
  meta.save(meta_path);
}

void Trainer::load_checkpoint(const fs::path& stem, bool force) {
  auto meta_path = stem;
  meta_path += ".meta";
  auto weights = stem;
  weights += ".gewt";
  const auto meta = KeyValues::load(meta_path);
  const auto expected = std::to_string(cfg_.hash());
  if (meta.get("config_hash") != expected && !force)
    fail(ErrorKind::Config, "checkpoint ", stem.string(), " was written with config hash ", meta.get("config_hash"),
         ", current config hashes to ", expected, " (force to override)");

  const auto archive = io::TensorArchive::load(weights);
  const auto report = model::import_weights(*model_, archive);
  if (!report.missing.empty())
    fail(ErrorKind::Format, "checkpoint ", weights.string(), " lacks ", report.missing.size(), " parameters, first ",
         report.missing.front());

  std::istringstream rng_state(meta.get("rng_state"));
  rng_state >> rng_;
  if (rng_state.fail()) fail(ErrorKind::Format, "bad rng_state in ", meta_path.string());
  epoch_ = static_cast<std::size_t>(meta.get_int("epoch"));
  best_val_ = meta.get_double("best_val_accuracy");
}

}  // namespace gewild::train
