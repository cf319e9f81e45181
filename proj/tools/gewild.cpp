// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <spawn.h>
#include <sys/wait.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gewild/gewild.h"

extern char** environ;

namespace {

namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  std::string kind;
  std::string message;
};

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

void check(gewild_status st) {
  if (st != GEWILD_OK) throw Failure{gewild_status_name(st), gewild_last_error()};
}

std::string take_string(char* text) {
  std::string out = text ? text : "";
  gewild_string_free(text);
  return out;
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Runs argv[0] from PATH without a shell so paths need no quoting.
void run_program(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  pid_t pid = 0;
  if (posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0)
    throw Failure{"io", "cannot run " + args[0] + " (is it installed and on PATH?)"};
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) throw Failure{"io", "waitpid failed for " + args[0]};
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw Failure{"io", args[0] + " failed on " + args.back()};
}

// ---- ingest ----

struct IngestArgs {
  std::string video, id, out, label, split = "train", ffmpeg = "ffmpeg";
  int fps = 15;
};

void cmd_ingest(const IngestArgs& a) {
  const fs::path out(a.out);
  const fs::path frames = out / "frames" / a.id;
  const fs::path wav = out / "audio" / (a.id + ".wav");
  fs::create_directories(frames);
  fs::create_directories(wav.parent_path());
  run_program({a.ffmpeg, "-nostdin", "-v", "error", "-y", "-i", a.video, "-vf", "fps=" + std::to_string(a.fps),
               "-start_number", "0", (frames / "frame_%05d.png").string()});
  run_program({a.ffmpeg, "-nostdin", "-v", "error", "-y", "-i", a.video, "-vn", "-ac", "1", "-ar", "16000", "-c:a",
               "pcm_s16le", wav.string()});
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(frames)) n += e.path().extension() == ".png";
  std::printf("ingested %s: %zu frames, %s\n", a.id.c_str(), n, wav.string().c_str());
  if (!a.label.empty()) {
    const fs::path manifest = out / "manifest.tsv";
    const bool fresh = !fs::exists(manifest);
    std::ofstream f(manifest, std::ios::app);
    if (!f) throw Failure{"io", "cannot append to " + manifest.string()};
    if (fresh) f << "id\tframes\twav\tlabel\tsplit\torigin\n";
    f << a.id << "\tframes/" << a.id << "\taudio/" << a.id << ".wav\t" << a.label << '\t' << a.split << "\treal\n";
  }
}

// ---- feature caches ----

struct CacheArgs {
  std::string manifest, out;
  std::size_t frames = 5;
  unsigned workers = 2;
};

void cmd_cache(const CacheArgs& a, const char* branch) {
  std::size_t clips = 0;
  check(gewild_cache_features(a.manifest.c_str(), branch, a.frames, a.out.c_str(), a.workers, &clips));
  std::printf("cached %s features for %zu clips in %s\n", branch, clips, a.out.c_str());
}

// ---- synth ----

struct SynthArgs {
  std::string faces, backgrounds, pool, out, counts = "802,923,934", procedural;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  int seconds = 0;
  bool plan_only = false;
};

void cmd_synth(SynthArgs a) {
  if (!a.procedural.empty()) {
    check(gewild_write_procedural_assets(a.procedural.c_str(), a.seed));
    const fs::path dir(a.procedural);
    if (a.faces.empty()) a.faces = (dir / "faces").string();
    if (a.backgrounds.empty()) a.backgrounds = (dir / "backgrounds").string();
    if (a.pool.empty()) a.pool = (dir / "pool.tsv").string();
    std::printf("procedural assets written to %s\n", a.procedural.c_str());
  }
  if (a.faces.empty() || a.backgrounds.empty() || a.pool.empty())
    throw CLI::ValidationError("synth", "--faces, --backgrounds and --pool are required without --procedural-assets");
  std::vector<std::size_t> counts;
  std::stringstream ss(a.counts);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      counts.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--counts", "expected three integers positive,neutral,negative");
    }
  }
  if (counts.size() != 3) throw CLI::ValidationError("--counts", "expected three integers positive,neutral,negative");
  gewild_synth_request req{a.faces.c_str(), a.backgrounds.c_str(), a.pool.c_str(), a.out.c_str(), counts[0],
                           counts[1],       counts[2],             a.seed,         a.workers,     a.plan_only,
                           a.seconds};
  std::size_t clips = 0;
  double worst = 0.0;
  check(gewild_synthesize(&req, &clips, &worst));
  if (a.plan_only)
    std::printf("planned %zu clips (positive %zu, neutral %zu, negative %zu)\n", clips, counts[0], counts[1], counts[2]);
  else
    std::printf("generated %zu clips in %s, worst per-face occlusion %.4f\n", clips, a.out.c_str(), worst);
}

// ---- train ----

struct TrainArgs {
  std::string config, manifest, synth_manifest, out, cache, resume, branches;
  std::vector<std::string> overrides;
  double ratio = 0.0;
  std::size_t frames = 0;
  bool force = false;
};

void cmd_train(const TrainArgs& a) {
  std::string text;
  for (const auto& o : a.overrides) text += o + "\n";
  if (a.frames) text += "n_frames=" + std::to_string(a.frames) + "\n";
  if (!a.branches.empty()) text += "branches=" + a.branches + "\n";
  gewild_train_request req{opt_cstr(a.config), opt_cstr(text), a.manifest.c_str(), opt_cstr(a.synth_manifest),
                           a.ratio,            opt_cstr(a.cache), opt_cstr(a.out)};
  gewild_trainer* trainer = nullptr;
  check(gewild_trainer_create(&req, &trainer));
  std::unique_ptr<gewild_trainer, decltype(&gewild_trainer_destroy)> guard(trainer, gewild_trainer_destroy);
  if (!a.resume.empty()) check(gewild_trainer_resume(trainer, a.resume.c_str(), a.force));
  std::size_t n_train = 0, n_val = 0, next = 0, total = 0;
  check(gewild_trainer_dataset_size(trainer, &n_train, &n_val));
  check(gewild_trainer_epochs(trainer, &next, &total));
  std::printf("training on %zu clips, validating on %zu, epochs %zu..%zu\n", n_train, n_val, next, total - 1);
  std::fflush(stdout);
  for (; next < total; ++next) {
    gewild_epoch_metrics m{};
    check(gewild_trainer_run_epoch(trainer, &m));
    std::printf("epoch %zu%s train_loss %.6f train_acc %.4f", m.epoch, m.vit_frozen ? " [vit frozen]" : "",
                m.train_loss, m.train_accuracy);
    if (m.has_val) std::printf(" val_loss %.6f val_acc %.4f", m.val_loss, m.val_accuracy);
    std::printf("\n");
    std::fflush(stdout);
  }
}

// ---- predict / eval / agree ----

struct PredictArgs {
  std::string checkpoint, manifest, split, out, tag, cache, branches;
  std::size_t frames = 0;
  unsigned workers = 2;
};

void cmd_predict(const PredictArgs& a) {
  gewild_model* model = nullptr;
  check(gewild_model_load(a.checkpoint.c_str(), &model));
  std::unique_ptr<gewild_model, decltype(&gewild_model_destroy)> guard(model, gewild_model_destroy);
  std::size_t n_frames = 0;
  char* branches = nullptr;
  check(gewild_model_info(model, &n_frames, &branches));
  const std::string active = take_string(branches);
  if (a.frames && a.frames != n_frames)
    throw Failure{"config", "checkpoint uses " + std::to_string(n_frames) + " frames, requested " +
                                std::to_string(a.frames)};
  if (!a.branches.empty() && a.branches != active)
    throw Failure{"config", "checkpoint branches are " + active + ", requested " + a.branches};
  const std::string tag = a.tag.empty() ? fs::path(a.checkpoint).filename().string() : a.tag;
  std::size_t count = 0;
  check(gewild_predict(model, a.manifest.c_str(), opt_cstr(a.split), opt_cstr(a.cache), tag.c_str(), a.workers,
                       a.out.c_str(), &count));
  std::printf("wrote %zu predictions to %s\n", count, a.out.c_str());
}

void cmd_eval(const std::string& pred, const std::string& truth, const std::string& csv) {
  gewild_eval_report r{};
  check(gewild_evaluate(pred.c_str(), truth.c_str(), &r));
  char* text = nullptr;
  check(gewild_report_format(&r, 0, &text));
  std::fputs(take_string(text).c_str(), stdout);
  if (!csv.empty()) {
    check(gewild_report_format(&r, 1, &text));
    std::ofstream f(csv);
    f << take_string(text);
    if (!f) throw Failure{"io", "cannot write " + csv};
  }
}

void cmd_agree(const std::string& a, const std::string& b) {
  double v = 0.0;
  check(gewild_agreement(a.c_str(), b.c_str(), &v));
  std::printf("agreement\t%.4f\n", v);
}

int cmd_gradcheck(std::uint64_t seed, double tol) {
  int ok = 0;
  check(gewild_gradcheck(
      seed, tol,
      [](const char* name, double err, size_t checked, int passed, void*) {
        std::printf("%-28s max_rel_err %.3e over %zu elements  %s\n", name, err, checked, passed ? "ok" : "FAIL");
        std::fflush(stdout);
      },
      nullptr, &ok));
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gewild: group emotion recognition from whole-scene video and audio"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gewild_version());

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Decode a video file into frames and 16 kHz audio with ffmpeg");
  c_ingest->add_option("--video", ingest.video, "Input video file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--id", ingest.id, "Clip id")->required();
  c_ingest->add_option("--out", ingest.out, "Dataset directory")->required();
  c_ingest->add_option("--fps", ingest.fps, "Frames per second to extract")->capture_default_str();
  c_ingest->add_option("--label", ingest.label, "Append to <out>/manifest.tsv with this label")
      ->check(CLI::IsMember({"negative", "neutral", "positive"}));
  c_ingest->add_option("--split", ingest.split, "Split for the manifest line")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  c_ingest->add_option("--ffmpeg", ingest.ffmpeg, "Decoder executable")->capture_default_str();

  CacheArgs audio_args, video_args;
  auto add_cache = [&](const char* name, const char* help, CacheArgs& a) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--manifest", a.manifest, "Clip manifest")->required();
    c->add_option("--frames", a.frames, "Frames per clip")->check(CLI::IsMember({5, 75}))->capture_default_str();
    c->add_option("--out", a.out, "Cache directory")->required();
    c->add_option("--workers", a.workers, "Worker threads")->capture_default_str();
    return c;
  };
  auto* c_audio = add_cache("audio", "Precompute log-mel features for a manifest", audio_args);
  auto* c_video = add_cache("video", "Precompute normalized frame features for a manifest", video_args);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic clips of moving faces over backgrounds");
  c_synth->add_option("--faces", synth.faces, "Face directory with negative/neutral/positive subfolders");
  c_synth->add_option("--backgrounds", synth.backgrounds, "Background image directory");
  c_synth->add_option("--pool", synth.pool, "Manifest of real clips whose audio is reused");
  c_synth->add_option("--counts", synth.counts, "Clips per class as positive,neutral,negative")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Generation seed")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--workers", synth.workers, "Worker threads (0 = all cores)")->capture_default_str();
  c_synth->add_option("--seconds", synth.seconds, "Clip length in seconds (default 5)");
  c_synth->add_flag("--plan-only", synth.plan_only, "Plan clips and report counts without writing");
  c_synth->add_option("--procedural-assets", synth.procedural,
                      "Write a small procedural asset set here and use it for any asset path not given");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the fusion model");
  c_train->add_option("--config", train.config, "key=value config file")->check(CLI::ExistingFile);
  c_train->add_option("--set", train.overrides, "Extra key=value setting (repeatable)");
  c_train->add_option("--manifest", train.manifest, "Real clip manifest (train and val splits)")->required();
  c_train->add_option("--synth-manifest", train.synth_manifest, "Synthetic clip manifest");
  c_train->add_option("--ratio", train.ratio, "Synthetic share of the training list")->check(CLI::Range(0.0, 0.999));
  c_train->add_option("--frames", train.frames, "Frames per clip")->check(CLI::IsMember({5, 75}));
  c_train->add_option("--branches", train.branches, "video, audio or video,audio");
  c_train->add_option("--cache", train.cache, "Feature cache directory");
  c_train->add_option("--out", train.out, "Output directory for metrics and checkpoints")->required();
  c_train->add_option("--resume", train.resume, "Checkpoint stem to continue from");
  c_train->add_flag("--force", train.force, "Resume even if the config differs");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Write class predictions for a manifest");
  c_predict->add_option("--checkpoint", predict.checkpoint, "Checkpoint stem (without .gewt)")->required();
  c_predict->add_option("--manifest", predict.manifest, "Clip manifest")->required();
  c_predict->add_option("--split", predict.split, "Only clips of this split")
      ->check(CLI::IsMember({"train", "val", "test"}));
  c_predict->add_option("--out", predict.out, "Prediction file")->required();
  c_predict->add_option("--tag", predict.tag, "Model tag (default: checkpoint name)");
  c_predict->add_option("--cache", predict.cache, "Feature cache directory");
  c_predict->add_option("--frames", predict.frames, "Expected frames per clip");
  c_predict->add_option("--branches", predict.branches, "Expected branches");
  c_predict->add_option("--workers", predict.workers, "Worker threads")->capture_default_str();

  std::string pred, truth, csv;
  auto* c_eval = app.add_subcommand("eval", "Accuracy, confusion matrix, precision and recall");
  c_eval->add_option("--pred", pred, "Prediction file")->required();
  c_eval->add_option("--truth", truth, "Manifest with ground-truth labels")->required();
  c_eval->add_option("--emit-csv", csv, "Also write metric,class,value rows here");

  std::string pa, pb;
  auto* c_agree = app.add_subcommand("agree", "Fraction of clips two prediction files label alike");
  c_agree->add_option("--a", pa, "First prediction file")->required();
  c_agree->add_option("--b", pb, "Second prediction file")->required();

  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-3;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of every layer and the tiny model");
  c_grad->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  c_grad->add_option("--tol", gc_tol, "Relative error tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_ingest->parsed()) cmd_ingest(ingest);
    if (c_audio->parsed()) cmd_cache(audio_args, "audio");
    if (c_video->parsed()) cmd_cache(video_args, "video");
    if (c_synth->parsed()) cmd_synth(synth);
    if (c_train->parsed()) cmd_train(train);
    if (c_predict->parsed()) cmd_predict(predict);
    if (c_eval->parsed()) cmd_eval(pred, truth, csv);
    if (c_agree->parsed()) cmd_agree(pa, pb);
    if (c_grad->parsed()) return cmd_gradcheck(gc_seed, gc_tol);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: kind=usage message=%s\n", one_line(e.what()).c_str());
    return kExitUsage;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: kind=%s message=%s\n", f.kind.c_str(), one_line(f.message).c_str());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: kind=io message=%s\n", one_line(e.what()).c_str());
    return kExitRuntime;
  }
  return 0;
}
