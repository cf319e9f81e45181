// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "gewild/gewild.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "audio/mel.hpp"
#include "audio/wav.hpp"
#include "common/error.hpp"
#include "common/manifest.hpp"
#include "eval/metrics.hpp"
#include "eval/predict.hpp"
#include "model/grad_suite.hpp"
#include "synth/procedural.hpp"
#include "synth/synth.hpp"
#include "train/features.hpp"
#include "train/mix.hpp"
#include "train/prefetch.hpp"
#include "train/trainer.hpp"
#include "video/frontend.hpp"

struct gewild_trainer {
  gewild::train::TrainConfig config;
  std::unique_ptr<gewild::train::DiskFeatureProvider> features;
  std::unique_ptr<gewild::train::Trainer> trainer;
  std::size_t n_train = 0, n_val = 0;
};

struct gewild_model {
  gewild::eval::LoadedModel loaded;
};

namespace {

using namespace gewild;

thread_local std::string g_last_error;

gewild_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return GEWILD_ERR_CONFIG;
    case ErrorKind::Dimension: return GEWILD_ERR_DIMENSION;
    case ErrorKind::Data: return GEWILD_ERR_DATA;
    case ErrorKind::Io: return GEWILD_ERR_IO;
    case ErrorKind::Format: return GEWILD_ERR_FORMAT;
    case ErrorKind::Unsupported: return GEWILD_ERR_UNSUPPORTED;
    case ErrorKind::Eval: return GEWILD_ERR_EVAL;
    case ErrorKind::Generation: return GEWILD_ERR_GENERATION;
    case ErrorKind::Training: return GEWILD_ERR_TRAINING;
    case ErrorKind::Internal: return GEWILD_ERR_INTERNAL;
  }
  return GEWILD_ERR_INTERNAL;
}

struct ArgumentError {
  std::string message;
};

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError{what};
}

template <typename F>
gewild_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return GEWILD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const ArgumentError& e) {
    g_last_error = e.message;
    return GEWILD_ERR_ARGUMENT;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return GEWILD_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GEWILD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GEWILD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return GEWILD_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

KeyValues merged_config(const gewild_train_request& r) {
  KeyValues kv;
  if (r.config_path) kv = KeyValues::load(r.config_path);
  if (r.config_text) {
    const auto extra = KeyValues::parse(r.config_text, "<overrides>");
    for (const auto& [k, v] : extra.values()) kv.set(k, v);
  }
  return kv;
}

}  // namespace

extern "C" {

const char* gewild_version(void) { return "0.1.0"; }

const char* gewild_status_name(gewild_status status) {
  switch (status) {
    case GEWILD_OK: return "ok";
    case GEWILD_ERR_CONFIG: return "config";
    case GEWILD_ERR_DIMENSION: return "dimension";
    case GEWILD_ERR_DATA: return "data";
    case GEWILD_ERR_IO: return "io";
    case GEWILD_ERR_FORMAT: return "format";
    case GEWILD_ERR_UNSUPPORTED: return "unsupported";
    case GEWILD_ERR_EVAL: return "eval";
    case GEWILD_ERR_GENERATION: return "generation";
    case GEWILD_ERR_TRAINING: return "training";
    case GEWILD_ERR_INTERNAL: return "internal";
    case GEWILD_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

const char* gewild_last_error(void) { return g_last_error.c_str(); }

void gewild_string_free(char* text) { std::free(text); }

gewild_status gewild_mel_window(const float* samples, size_t count, float* out) {
  return guarded([&] {
    require(samples && out, "samples and out must be non-null");
    const auto mel = audio::mel_spectrogram(std::span<const float>(samples, count));
    std::copy(mel.begin(), mel.end(), out);
  });
}

gewild_status gewild_audio_features(const char* wav_path, size_t n_frames, const char* out_path) {
  return guarded([&] {
    require(wav_path && out_path, "wav_path and out_path must be non-null");
    auto seq = audio::clip_to_mel_sequence(audio::load_wav(wav_path), n_frames,
                                           std::filesystem::path(wav_path).stem().string());
    train::save_mel_features(out_path, train::mel_tensor(std::move(seq)));
  });
}

gewild_status gewild_frame_indices(int available, int n, int* out) {
  return guarded([&] {
    require(out != nullptr, "out must be non-null");
    const auto idx = video::sample_frame_indices(available, n);
    std::copy(idx.begin(), idx.end(), out);
  });
}

gewild_status gewild_video_features(const char* frames_dir, size_t n_frames, const char* out_path, char** warnings) {
  return guarded([&] {
    require(frames_dir && out_path, "frames_dir and out_path must be non-null");
    auto seq = video::clip_to_frame_sequence(frames_dir, static_cast<int>(n_frames),
                                             std::filesystem::path(frames_dir).filename().string());
    std::string joined;
    for (const auto& w : seq.warnings) joined += w + "\n";
    train::save_frame_features(out_path, train::frame_tensor(std::move(seq)));
    if (warnings) *warnings = dup_string(joined);
  });
}

gewild_status gewild_cache_features(const char* manifest, const char* branches, size_t n_frames,
                                    const char* cache_dir, unsigned workers, size_t* clips) {
  return guarded([&] {
    require(manifest && branches && cache_dir, "manifest, branches and cache_dir must be non-null");
    const auto records = read_manifest(manifest);
    const train::DiskFeatureProvider features(n_frames, model::Branches::parse(branches), cache_dir);
    train::Prefetcher<int> run(
        records.size(), [&](std::size_t i) { return (features.load(records[i]), 0); }, 2 * std::max(1u, workers),
        std::max(1u, workers));
    while (!run.done()) run.next();
    if (clips) *clips = records.size();
  });
}

gewild_status gewild_write_procedural_assets(const char* dir, uint64_t seed) {
  return guarded([&] {
    require(dir != nullptr, "dir must be non-null");
    synth::ProceduralOptions opt;
    opt.seed = seed;
    synth::write_procedural_assets(dir, opt);
  });
}

gewild_status gewild_synthesize(const gewild_synth_request* request, size_t* clips_out, double* max_occlusion_out) {
  return guarded([&] {
    require(request && request->faces_dir && request->backgrounds_dir && request->pool_manifest && request->out_dir,
            "synth request needs faces_dir, backgrounds_dir, pool_manifest and out_dir");
    const auto assets = synth::load_assets(request->faces_dir, request->backgrounds_dir);
    const auto pool = synth::audio_pool(read_manifest(request->pool_manifest));
    synth::SynthConfig cfg;
    if (request->seconds > 0) cfg.seconds = request->seconds;
    synth::DatasetOptions opt;
    opt.counts = {request->negative, request->neutral, request->positive};
    opt.seed = request->seed;
    opt.workers = request->workers;
    opt.plan_only = request->plan_only != 0;
    const auto res = synth::generate_dataset(assets, pool, cfg, opt, request->out_dir);
    if (clips_out) *clips_out = res.records.size();
    if (max_occlusion_out) {
      double worst = 0.0;
      for (const auto& r : res.reports) worst = std::max(worst, r.max());
      *max_occlusion_out = worst;
    }
  });
}

gewild_status gewild_mix_count(size_t n_real, double ratio, size_t* n_synth) {
  return guarded([&] {
    require(n_synth != nullptr, "n_synth must be non-null");
    *n_synth = train::compute_mix_counts(n_real, ratio);
  });
}

gewild_status gewild_trainer_create(const gewild_train_request* request, gewild_trainer** out) {
  return guarded([&] {
    require(request && request->manifest && out, "train request needs a manifest and an out handle");
    auto t = std::make_unique<gewild_trainer>();
    t->config = train::TrainConfig::from_kv(merged_config(*request));
    const auto real = read_manifest(request->manifest);
    auto training = filter_split(real, "train");
    const auto val = filter_split(real, "val");
    if (request->synth_manifest) {
      auto pool = filter_split(read_manifest(request->synth_manifest), "train");
      training = train::build_mixed_dataset(training, pool, request->ratio, t->config.seed);
    } else if (request->ratio != 0.0) {
      fail(ErrorKind::Config, "ratio ", request->ratio, " given without a synthetic manifest");
    }
    t->n_train = training.size();
    t->n_val = val.size();
    t->features = std::make_unique<train::DiskFeatureProvider>(
        t->config.model.n_frames, t->config.model.branches,
        request->cache_dir ? std::filesystem::path(request->cache_dir) : std::filesystem::path());
    t->trainer = std::make_unique<train::Trainer>(
        t->config, *t->features, std::move(training), val,
        request->out_dir ? std::filesystem::path(request->out_dir) : std::filesystem::path());
    *out = t.release();
  });
}

void gewild_trainer_destroy(gewild_trainer* trainer) { delete trainer; }

gewild_status gewild_trainer_resume(gewild_trainer* trainer, const char* stem, int force) {
  return guarded([&] {
    require(trainer && stem, "trainer and stem must be non-null");
    trainer->trainer->load_checkpoint(stem, force != 0);
  });
}

gewild_status gewild_trainer_epochs(const gewild_trainer* trainer, size_t* next, size_t* total) {
  return guarded([&] {
    require(trainer != nullptr, "trainer must be non-null");
    if (next) *next = trainer->trainer->next_epoch();
    if (total) *total = trainer->config.epochs;
  });
}

gewild_status gewild_trainer_dataset_size(const gewild_trainer* trainer, size_t* n_train, size_t* n_val) {
  return guarded([&] {
    require(trainer != nullptr, "trainer must be non-null");
    if (n_train) *n_train = trainer->n_train;
    if (n_val) *n_val = trainer->n_val;
  });
}

gewild_status gewild_trainer_run_epoch(gewild_trainer* trainer, gewild_epoch_metrics* out) {
  return guarded([&] {
    require(trainer && out, "trainer and out must be non-null");
    const auto m = trainer->trainer->run_epoch();
    *out = {m.epoch, m.train_loss, m.train_accuracy, m.val_accuracy.has_value(), m.val_loss.value_or(0.0),
            m.val_accuracy.value_or(0.0), m.vit_frozen};
  });
}

gewild_status gewild_trainer_save(const gewild_trainer* trainer, const char* stem) {
  return guarded([&] {
    require(trainer && stem, "trainer and stem must be non-null");
    trainer->trainer->save_checkpoint(stem);
  });
}

gewild_status gewild_model_load(const char* checkpoint_stem, gewild_model** out) {
  return guarded([&] {
    require(checkpoint_stem && out, "checkpoint_stem and out must be non-null");
    auto m = std::make_unique<gewild_model>();
    m->loaded = eval::load_model_checkpoint(checkpoint_stem);
    *out = m.release();
  });
}

void gewild_model_destroy(gewild_model* model) { delete model; }

gewild_status gewild_model_info(const gewild_model* model, size_t* n_frames, char** branches) {
  return guarded([&] {
    require(model != nullptr, "model must be non-null");
    const auto& cfg = model->loaded.config.model;
    if (n_frames) *n_frames = cfg.n_frames;
    if (branches) *branches = dup_string(cfg.branches.to_string());
  });
}

gewild_status gewild_predict(const gewild_model* model, const char* manifest, const char* split,
                             const char* cache_dir, const char* tag, unsigned workers, const char* out_path,
                             size_t* count) {
  return guarded([&] {
    require(model && manifest && out_path, "model, manifest and out_path must be non-null");
    auto records = read_manifest(manifest);
    if (split) records = filter_split(records, split);
    if (records.empty()) fail(ErrorKind::Data, "no clips to predict in ", manifest, split ? " split " : "", split ? split : "");
    const auto& cfg = model->loaded.config.model;
    train::DiskFeatureProvider features(cfg.n_frames, cfg.branches,
                                        cache_dir ? std::filesystem::path(cache_dir) : std::filesystem::path());
    const auto set = eval::predict(*model->loaded.model, features, records, tag ? tag : "", workers);
    eval::write_predictions(out_path, set);
    if (count) *count = set.size();
  });
}

gewild_status gewild_evaluate(const char* predictions, const char* truth_manifest, gewild_eval_report* out) {
  return guarded([&] {
    require(predictions && truth_manifest && out, "predictions, truth_manifest and out must be non-null");
    const auto truth = eval::truth_from_records(read_manifest(truth_manifest, false));
    const auto r = eval::evaluate(eval::read_predictions(predictions), truth);
    *out = {};
    out->total = r.total;
    out->correct = r.correct;
    out->accuracy = r.accuracy;
    for (std::size_t t = 0; t < GEWILD_NUM_CLASSES; ++t) {
      for (std::size_t p = 0; p < GEWILD_NUM_CLASSES; ++p) out->confusion[t][p] = r.confusion[t][p];
      out->precision_defined[t] = r.precision[t].has_value();
      out->precision[t] = r.precision[t].value_or(0.0);
      out->recall_defined[t] = r.recall[t].has_value();
      out->recall[t] = r.recall[t].value_or(0.0);
    }
  });
}

gewild_status gewild_report_format(const gewild_eval_report* report, int csv, char** text) {
  return guarded([&] {
    require(report && text, "report and text must be non-null");
    eval::EvalReport r;
    r.total = report->total;
    r.correct = report->correct;
    r.accuracy = report->accuracy;
    for (std::size_t t = 0; t < GEWILD_NUM_CLASSES; ++t) {
      for (std::size_t p = 0; p < GEWILD_NUM_CLASSES; ++p) r.confusion[t][p] = report->confusion[t][p];
      if (report->precision_defined[t]) r.precision[t] = report->precision[t];
      if (report->recall_defined[t]) r.recall[t] = report->recall[t];
    }
    *text = dup_string(csv ? eval::report_csv(r) : eval::format_report(r));
  });
}

gewild_status gewild_agreement(const char* predictions_a, const char* predictions_b, double* out) {
  return guarded([&] {
    require(predictions_a && predictions_b && out, "both prediction paths and out must be non-null");
    *out = eval::prediction_agreement(eval::read_predictions(predictions_a), eval::read_predictions(predictions_b));
  });
}

gewild_status gewild_gradcheck(uint64_t seed, double tolerance, gewild_gradcheck_fn on_result, void* user,
                               int* all_passed) {
  return guarded([&] {
    bool ok = true;
    model::run_gradient_suite(seed, [&](const nn::GradCheckReport& r) {
      const bool passed = r.passed(tolerance);
      ok = ok && passed;
      if (on_result) on_result(r.name.c_str(), r.max_rel_err, r.checked, passed, user);
    });
    if (all_passed) *all_passed = ok;
  });
}

}  // extern "C"
