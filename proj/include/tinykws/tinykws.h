/* Copyright 2026 The tinykws Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the tinykws engine. Every call returns a tkws_status; on
 * failure tkws_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * tkws_string_free. */
#ifndef TINYKWS_TINYKWS_H_
#define TINYKWS_TINYKWS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TKWS_API __declspec(dllexport)
#else
#define TKWS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tkws_status {
  TKWS_OK = 0,
  TKWS_INVALID_ARGUMENT = 1, /* bad argument, config or shape */
  TKWS_IO_ERROR = 2,         /* missing or unreadable file */
  TKWS_FORMAT_ERROR = 3,     /* corrupt or unsupported file contents */
  TKWS_TRAINING_ERROR = 4,   /* e.g. non-finite loss */
  TKWS_INTERNAL_ERROR = 5
} tkws_status;

typedef struct tkws_model tkws_model;
typedef struct tkws_dataset tkws_dataset;

typedef enum tkws_split { TKWS_SPLIT_TRAIN = 0, TKWS_SPLIT_VAL = 1, TKWS_SPLIT_TEST = 2 } tkws_split;

TKWS_API const char* tkws_last_error(void);
TKWS_API void tkws_string_free(char* s);
TKWS_API uint32_t tkws_format_version(void);

/* Models */
TKWS_API tkws_status tkws_config_validate(const char* config_json, char** canonical_json);
TKWS_API tkws_status tkws_model_build(const char* config_json, uint64_t seed, tkws_model** out);
TKWS_API tkws_status tkws_model_build_file(const char* config_path, uint64_t seed, tkws_model** out);
TKWS_API tkws_status tkws_model_load(const char* path, tkws_model** out);
/* f32 != 0 stores tensors as binary32 (export); otherwise exact f64. */
TKWS_API tkws_status tkws_model_save(const tkws_model* model, const char* path, int f32);
TKWS_API void tkws_model_free(tkws_model* model);
TKWS_API tkws_status tkws_model_param_count(const tkws_model* model, size_t* out);
TKWS_API tkws_status tkws_model_config_json(const tkws_model* model, char** out);
/* input holds n samples of the model's (C, H, W) input, probs receives
 * n * n_classes values. f32 != 0 runs the binary32 path. */
TKWS_API tkws_status tkws_model_predict(const tkws_model* model, const double* input, size_t n,
                                        int f32, double* probs, size_t probs_len);
TKWS_API tkws_status tkws_model_n_classes(const tkws_model* model, size_t* out);
/* bits in {4, 8, 32}; report_json receives the quantization report (may be NULL). */
TKWS_API tkws_status tkws_model_quantize(tkws_model* model, int bits, char** report_json);

/* Complexity. input_shape may be NULL (config's shape); bits <= 0 uses the
 * config's weight width. val_acc < 0 skips the constraint verdict. */
TKWS_API tkws_status tkws_analyze(const char* config_json, const size_t* input_shape, int bits,
                                  double val_acc, char** report_json, char** table);

/* Front end: MFCC stack of a 16 kHz mono WAV file. values receives a
 * malloc'd frames * coeffs array released with tkws_buffer_free. */
TKWS_API tkws_status tkws_featurize_wav(const char* path, size_t* frames, size_t* coeffs,
                                        double** values);
TKWS_API void tkws_buffer_free(double* values);

/* Datasets. labels is a comma-separated list or NULL (every directory). */
TKWS_API tkws_status tkws_dataset_scan(const char* root, const char* labels, int map_unknown,
                                       tkws_dataset** out);
TKWS_API tkws_status tkws_dataset_synthetic(size_t n_classes, size_t n_per_class, uint64_t seed,
                                            tkws_dataset** out);
TKWS_API tkws_status tkws_dataset_manifest_json(const tkws_dataset* ds, char** out);
TKWS_API tkws_status tkws_dataset_split_size(const tkws_dataset* ds, tkws_split split, size_t* out);
TKWS_API tkws_status tkws_dataset_labels_json(const tkws_dataset* ds, char** out);
TKWS_API void tkws_dataset_free(tkws_dataset* ds);

typedef struct tkws_train_options {
  size_t epochs;
  size_t batch_size;
  double lr;
  double momentum;
  uint64_t seed;
  const char* checkpoint_dir; /* NULL or "" disables checkpoints */
  /* Optional per-epoch progress hook. */
  void (*on_epoch)(void* user, size_t epoch, double train_loss, double train_acc, double val_acc);
  void* user;
} tkws_train_options;

TKWS_API void tkws_train_options_default(tkws_train_options* options);
/* report_json and report_csv may be NULL. */
TKWS_API tkws_status tkws_train(tkws_model* model, const tkws_dataset* ds,
                                const tkws_train_options* options, char** report_json,
                                char** report_csv, double* wall_seconds);
TKWS_API tkws_status tkws_evaluate(const tkws_model* model, const tkws_dataset* ds, tkws_split split,
                                   int f32, double* accuracy);

#ifdef __cplusplus
}
#endif

#endif /* TINYKWS_TINYKWS_H_ */
