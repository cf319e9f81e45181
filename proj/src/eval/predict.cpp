// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/predict.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "common/error.hpp"
#include "io/archive.hpp"
#include "model/weights.hpp"

namespace gewild::eval {
namespace fs = std::filesystem;

LoadedModel load_model_checkpoint(const fs::path& stem) {
  auto meta_path = stem;
  meta_path += ".meta";
  auto weights = stem;
  weights += ".gewt";
  const auto meta = KeyValues::load(meta_path);
  KeyValues cfg_kv;
  for (const auto& [key, value] : meta.values())
    if (key.rfind("config.", 0) == 0) cfg_kv.set(key.substr(7), value);
  LoadedModel out;
  out.config = train::TrainConfig::from_kv(cfg_kv);
  out.config.model.seed = out.config.seed;
  out.model = std::make_unique<model::FusionModel<float>>(out.config.model);
  const auto report = model::import_weights(*out.model, io::TensorArchive::load(weights));
  if (!report.missing.empty())
    fail(ErrorKind::Format, "checkpoint ", weights.string(), " lacks parameter ", report.missing.front());
  return out;
}

PredictionSet predict(const model::FusionModel<float>& model, const train::FeatureProvider& features,
                      const std::vector<ManifestRecord>& records, std::string model_tag, unsigned workers) {
  if (model.config().classes != kNumClasses)
    fail(ErrorKind::Config, "prediction files hold ", kNumClasses, " classes, model has ", model.config().classes);
  PredictionSet set;
  set.model_tag = std::move(model_tag);
  set.predictions.resize(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        const auto clip = features.load(records[i]);
        const auto probs = model.forward(clip.tensors).probs;
        Probs p{};
        for (std::size_t c = 0; c < p.size(); ++c) p[c] = probs[c];
        set.predictions[i] = make_prediction(records[i].id, p);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(records.size())));
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return set;
}

}  // namespace gewild::eval
