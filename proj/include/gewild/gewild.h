/* Copyright 2026 The gewild Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the gewild group-emotion toolkit. Every call returns a
 * gewild_status; on failure gewild_last_error() describes the problem for
 * the calling thread until its next gewild call. Handles are opaque and
 * released with the matching *_destroy function. Strings handed out by the
 * library are released with gewild_string_free.
 */
#ifndef GEWILD_GEWILD_H_
#define GEWILD_GEWILD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(GEWILD_BUILDING_LIBRARY)
#define GEWILD_API __attribute__((visibility("default")))
#else
#define GEWILD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gewild_status {
  GEWILD_OK = 0,
  GEWILD_ERR_CONFIG = 1,
  GEWILD_ERR_DIMENSION = 2,
  GEWILD_ERR_DATA = 3,
  GEWILD_ERR_IO = 4,
  GEWILD_ERR_FORMAT = 5,
  GEWILD_ERR_UNSUPPORTED = 6,
  GEWILD_ERR_EVAL = 7,
  GEWILD_ERR_GENERATION = 8,
  GEWILD_ERR_TRAINING = 9,
  GEWILD_ERR_INTERNAL = 10,
  GEWILD_ERR_ARGUMENT = 11 /* null pointer or out-of-range argument */
} gewild_status;

enum { GEWILD_NUM_CLASSES = 3, GEWILD_MEL_ROWS = 128, GEWILD_MEL_COLS = 251, GEWILD_WINDOW_SAMPLES = 16000 };

GEWILD_API const char* gewild_version(void);
/* Short lowercase name such as "config" or "data". */
GEWILD_API const char* gewild_status_name(gewild_status status);
GEWILD_API const char* gewild_last_error(void);
GEWILD_API void gewild_string_free(char* text);

/* ---- audio ---- */

/* One 1 s window of 16 kHz mono samples -> 128 x 251 log-mel image, row major. */
GEWILD_API gewild_status gewild_mel_window(const float* samples, size_t count, float* out);

/* Loads a WAV file, standardizes it and caches n log-mel images under key "mel". */
GEWILD_API gewild_status gewild_audio_features(const char* wav_path, size_t n_frames, const char* out_path);

/* ---- video ---- */

/* n endpoint-inclusive frame indices out of `available`. */
GEWILD_API gewild_status gewild_frame_indices(int available, int n, int* out);

/* Samples, resizes and normalizes n frames of a frame directory into a GEWT
 * archive under key "frames". Warnings (such as repeated frames) are
 * returned newline-separated in *warnings when non-null. */
GEWILD_API gewild_status gewild_video_features(const char* frames_dir, size_t n_frames, const char* out_path,
                                               char** warnings);

/* ---- feature caches ---- */

/* Computes and caches the features of every clip in `manifest` for the
 * given branches ("audio", "video" or "video,audio"). Cached files are
 * named <id>.n<frames>.mel.gewt and <id>.n<frames>.frames.gewt, which is
 * the layout training and prediction read from a cache directory. */
GEWILD_API gewild_status gewild_cache_features(const char* manifest, const char* branches, size_t n_frames,
                                               const char* cache_dir, unsigned workers, size_t* clips);

/* ---- synthetic data ---- */

/* Writes a small procedural asset set: faces/<class>/NAME.png, backgrounds/NAME.png
 * and an audio pool manifest pool.tsv. */
GEWILD_API gewild_status gewild_write_procedural_assets(const char* dir, uint64_t seed);

typedef struct gewild_synth_request {
  const char* faces_dir;
  const char* backgrounds_dir;
  const char* pool_manifest;
  const char* out_dir;
  size_t positive;
  size_t neutral;
  size_t negative;
  uint64_t seed;
  unsigned workers;
  int plan_only; /* nonzero: plan every clip, write nothing */
  int seconds;   /* clip length; 0 keeps the default of 5 */
} gewild_synth_request;

GEWILD_API gewild_status gewild_synthesize(const gewild_synth_request* request, size_t* clips_out,
                                           double* max_occlusion_out);

/* ---- mixing ---- */

GEWILD_API gewild_status gewild_mix_count(size_t n_real, double ratio, size_t* n_synth);

/* ---- training ---- */

typedef struct gewild_trainer gewild_trainer;

typedef struct gewild_train_request {
  const char* config_path;    /* key=value file, may be null */
  const char* config_text;    /* extra key=value lines applied last, may be null */
  const char* manifest;       /* real clips; train and val splits are used */
  const char* synth_manifest; /* may be null */
  double ratio;               /* synthetic share of the training list */
  const char* cache_dir;      /* feature cache, may be null */
  const char* out_dir;        /* metrics and checkpoints, may be null */
} gewild_train_request;

typedef struct gewild_epoch_metrics {
  size_t epoch;
  double train_loss;
  double train_accuracy;
  int has_val;
  double val_loss;
  double val_accuracy;
  int vit_frozen;
} gewild_epoch_metrics;

GEWILD_API gewild_status gewild_trainer_create(const gewild_train_request* request, gewild_trainer** out);
GEWILD_API void gewild_trainer_destroy(gewild_trainer* trainer);
/* Continue from <stem>.gewt / <stem>.meta; force ignores a config mismatch. */
GEWILD_API gewild_status gewild_trainer_resume(gewild_trainer* trainer, const char* stem, int force);
GEWILD_API gewild_status gewild_trainer_epochs(const gewild_trainer* trainer, size_t* next, size_t* total);
GEWILD_API gewild_status gewild_trainer_dataset_size(const gewild_trainer* trainer, size_t* train, size_t* val);
GEWILD_API gewild_status gewild_trainer_run_epoch(gewild_trainer* trainer, gewild_epoch_metrics* out);
GEWILD_API gewild_status gewild_trainer_save(const gewild_trainer* trainer, const char* stem);

/* ---- prediction ---- */

typedef struct gewild_model gewild_model;

GEWILD_API gewild_status gewild_model_load(const char* checkpoint_stem, gewild_model** out);
GEWILD_API void gewild_model_destroy(gewild_model* model);
/* Frames per clip and the active branches ("video", "audio" or "video,audio"). */
GEWILD_API gewild_status gewild_model_info(const gewild_model* model, size_t* n_frames, char** branches);

/* Predicts every clip of `manifest` (only `split` when non-null) and writes
 * a prediction file. */
GEWILD_API gewild_status gewild_predict(const gewild_model* model, const char* manifest, const char* split,
                                        const char* cache_dir, const char* tag, unsigned workers,
                                        const char* out_path, size_t* count);

/* ---- evaluation ---- */

typedef struct gewild_eval_report {
  size_t total;
  size_t correct;
  double accuracy;
  size_t confusion[GEWILD_NUM_CLASSES][GEWILD_NUM_CLASSES]; /* [truth][predicted] */
  double precision[GEWILD_NUM_CLASSES];
  double recall[GEWILD_NUM_CLASSES];
  int precision_defined[GEWILD_NUM_CLASSES];
  int recall_defined[GEWILD_NUM_CLASSES];
} gewild_eval_report;

GEWILD_API gewild_status gewild_evaluate(const char* predictions, const char* truth_manifest,
                                         gewild_eval_report* out);
/* Human-readable table, or metric,class,value CSV when csv is nonzero. */
GEWILD_API gewild_status gewild_report_format(const gewild_eval_report* report, int csv, char** text);
GEWILD_API gewild_status gewild_agreement(const char* predictions_a, const char* predictions_b, double* out);

/* ---- gradient checks ---- */

typedef void (*gewild_gradcheck_fn)(const char* name, double max_rel_err, size_t checked, int passed, void* user);

/* Runs the finite-difference suite; *all_passed is set when every check is
 * within tolerance. */
GEWILD_API gewild_status gewild_gradcheck(uint64_t seed, double tolerance, gewild_gradcheck_fn on_result, void* user,
                                          int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* GEWILD_GEWILD_H_ */
