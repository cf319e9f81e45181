/* Copyright 2026 The gewild Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Exercises the C interface from plain C: status codes, error text, handle
 * lifetimes and one small synth -> train -> predict -> eval round. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "gewild/gewild.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(call)                                                                      \
  do {                                                                                       \
    gewild_status st_ = (call);                                                              \
    if (st_ != GEWILD_OK) {                                                                  \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, gewild_status_name(st_), \
              gewild_last_error());                                                          \
      ++failures;                                                                            \
    }                                                                                        \
  } while (0)

/* Heap-allocated "dir/name"; the test frees everything at the end. */
static char* owned[16];
static int n_owned = 0;
static char* join(const char* dir, const char* name) {
  size_t len = strlen(dir) + strlen(name) + 2;
  char* out = malloc(len);
  snprintf(out, len, "%s/%s", dir, name);
  owned[n_owned++] = out;
  return out;
}

static void basics(void) {
  EXPECT(strlen(gewild_version()) > 0);
  EXPECT(strcmp(gewild_status_name(GEWILD_ERR_DATA), "data") == 0);

  EXPECT(gewild_mel_window(NULL, 0, NULL) == GEWILD_ERR_ARGUMENT);
  EXPECT(strlen(gewild_last_error()) > 0);

  float* window = calloc(GEWILD_WINDOW_SAMPLES, sizeof(float));
  float* mel = calloc(GEWILD_MEL_ROWS * GEWILD_MEL_COLS, sizeof(float));
  for (int i = 0; i < GEWILD_WINDOW_SAMPLES; ++i) window[i] = (float)sin(2.0 * 3.14159265358979 * 440.0 * i / 16000.0);
  EXPECT_OK(gewild_mel_window(window, GEWILD_WINDOW_SAMPLES, mel));
  EXPECT(strlen(gewild_last_error()) == 0);
  int finite = 1;
  for (int i = 0; i < GEWILD_MEL_ROWS * GEWILD_MEL_COLS; ++i) finite &= isfinite(mel[i]);
  EXPECT(finite);
  EXPECT(gewild_mel_window(window, 100, mel) == GEWILD_ERR_DIMENSION);
  free(window);
  free(mel);

  int idx[5];
  EXPECT_OK(gewild_frame_indices(75, 5, idx));
  EXPECT(idx[0] == 0 && idx[1] == 18 && idx[2] == 37 && idx[3] == 55 && idx[4] == 74);

  size_t n = 0;
  EXPECT_OK(gewild_mix_count(2661, 0.3, &n));
  EXPECT(n == 1140);
  EXPECT(gewild_mix_count(2661, 1.0, &n) == GEWILD_ERR_CONFIG);

  EXPECT(gewild_audio_features("/nonexistent/clip.wav", 5, "/tmp/x.gewt") == GEWILD_ERR_IO);
  EXPECT(strstr(gewild_last_error(), "/nonexistent/clip.wav") != NULL);
}

static void round_trip(const char* dir) {
  char* assets = join(dir, "assets");
  char* faces = join(assets, "faces");
  char* bgs = join(assets, "backgrounds");
  char* pool = join(assets, "pool.tsv");
  char* syn = join(dir, "syn");
  char* manifest = join(syn, "manifest.tsv");
  char* run = join(dir, "run");
  char* stem = join(run, "last");
  char* pred = join(dir, "pred.tsv");
  char* cache = join(dir, "cache");

  EXPECT_OK(gewild_write_procedural_assets(assets, 1));
  gewild_synth_request req = {faces, bgs, pool, syn, 2, 1, 1, 9, 2, 0, 1};
  size_t clips = 0;
  double worst = 1.0;
  EXPECT_OK(gewild_synthesize(&req, &clips, &worst));
  EXPECT(clips == 4);
  EXPECT(worst <= 0.10);

  size_t cached = 0;
  EXPECT_OK(gewild_cache_features(manifest, "video,audio", 2, cache, 2, &cached));
  EXPECT(cached == 4);

  gewild_train_request tr = {NULL, "preset=tiny\nn_frames=2\nepochs=2\nfreeze_epochs=1\nlr=0.01\n",
                             manifest, NULL, 0.0, cache, run};
  gewild_trainer* trainer = NULL;
  EXPECT_OK(gewild_trainer_create(&tr, &trainer));
  if (!trainer) return;
  size_t n_train = 0, n_val = 0, next = 9, total = 0;
  EXPECT_OK(gewild_trainer_dataset_size(trainer, &n_train, &n_val));
  EXPECT(n_train == 4 && n_val == 0);
  gewild_epoch_metrics m;
  EXPECT_OK(gewild_trainer_run_epoch(trainer, &m));
  EXPECT(m.epoch == 0 && m.vit_frozen && !m.has_val && isfinite(m.train_loss));
  EXPECT_OK(gewild_trainer_epochs(trainer, &next, &total));
  EXPECT(next == 1 && total == 2);
  gewild_trainer_destroy(trainer);

  gewild_train_request bad = tr;
  bad.config_text = "preset=tiny\nlearning_rate=3\n";
  trainer = NULL;
  EXPECT(gewild_trainer_create(&bad, &trainer) == GEWILD_ERR_CONFIG);
  EXPECT(trainer == NULL);
  EXPECT(strstr(gewild_last_error(), "learning_rate") != NULL);

  gewild_model* model = NULL;
  EXPECT_OK(gewild_model_load(stem, &model));
  if (!model) return;
  size_t frames = 0;
  char* branches = NULL;
  EXPECT_OK(gewild_model_info(model, &frames, &branches));
  EXPECT(frames == 2 && branches && strcmp(branches, "video,audio") == 0);
  gewild_string_free(branches);
  size_t count = 0;
  EXPECT_OK(gewild_predict(model, manifest, "train", cache, "c-test", 2, pred, &count));
  EXPECT(count == 4);
  gewild_model_destroy(model);

  gewild_eval_report report;
  EXPECT_OK(gewild_evaluate(pred, manifest, &report));
  EXPECT(report.total == 4);
  size_t trace = 0;
  for (int c = 0; c < GEWILD_NUM_CLASSES; ++c) trace += report.confusion[c][c];
  EXPECT(fabs(report.accuracy - (double)trace / 4.0) < 1e-12);
  char* text = NULL;
  EXPECT_OK(gewild_report_format(&report, 1, &text));
  EXPECT(text && strncmp(text, "metric,class,value", 18) == 0);
  gewild_string_free(text);

  double agreement = 0.0;
  EXPECT_OK(gewild_agreement(pred, pred, &agreement));
  EXPECT(agreement == 1.0);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s SCRATCH_DIR\n", argv[0]);
    return 2;
  }
  basics();
  round_trip(argv[1]);
  for (int i = 0; i < n_owned; ++i) free(owned[i]);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
