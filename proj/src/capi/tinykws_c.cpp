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

#include "tinykws/tinykws.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tinykws/complexity.hpp"
#include "tinykws/config.hpp"
#include "tinykws/dataset.hpp"
#include "tinykws/dsp.hpp"
#include "tinykws/error.hpp"
#include "tinykws/model.hpp"
#include "tinykws/quantize.hpp"
#include "tinykws/serialize.hpp"
#include "tinykws/trainer.hpp"
#include "tinykws/wav.hpp"

struct tkws_model {
  tinykws::Model model;
};

struct tkws_dataset {
  tinykws::FeatureSplits splits;
  std::string manifest_json;
};

namespace {

thread_local std::string g_last_error;

tkws_status fail(tkws_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
tkws_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TKWS_OK;
  } catch (const tinykws::InvalidArgument& e) {
    return fail(TKWS_INVALID_ARGUMENT, e.what());
  } catch (const tinykws::IoError& e) {
    return fail(TKWS_IO_ERROR, e.what());
  } catch (const tinykws::FormatError& e) {
    return fail(TKWS_FORMAT_ERROR, e.what());
  } catch (const tinykws::TrainingError& e) {
    return fail(TKWS_TRAINING_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TKWS_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(TKWS_INTERNAL_ERROR, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw tinykws::InvalidArgument(std::string(what) + " must not be NULL");
}

std::vector<std::string> split_labels(const char* labels) {
  std::vector<std::string> out;
  if (labels == nullptr) return out;
  std::stringstream ss(labels);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw tinykws::InvalidArgument("empty label in list");
    out.push_back(item);
  }
  return out;
}

void check_labels(const tinykws::Model& model, const tinykws::FeatureSplits& splits) {
  if (splits.labels.size() != model.config().n_classes) {
    throw tinykws::InvalidArgument("dataset has " + std::to_string(splits.labels.size()) +
                                   " labels but the model has " +
                                   std::to_string(model.config().n_classes) + " classes");
  }
}

tinykws::Split to_split(tkws_split s) {
  switch (s) {
    case TKWS_SPLIT_TRAIN:
      return tinykws::Split::kTrain;
    case TKWS_SPLIT_VAL:
      return tinykws::Split::kVal;
    case TKWS_SPLIT_TEST:
      return tinykws::Split::kTest;
  }
  throw tinykws::InvalidArgument("unknown split code " + std::to_string(static_cast<int>(s)));
}

}  // namespace

extern "C" {

const char* tkws_last_error(void) { return g_last_error.c_str(); }

void tkws_string_free(char* s) { std::free(s); }

void tkws_buffer_free(double* values) { std::free(values); }

uint32_t tkws_format_version(void) { return tinykws::kModelFormatVersion; }

tkws_status tkws_config_validate(const char* config_json, char** canonical_json) {
  return guarded([&] {
    require(config_json, "config_json");
    const auto cfg = tinykws::parse_config(config_json);
    tinykws::infer_shapes(cfg);
    if (canonical_json) *canonical_json = dup_string(tinykws::config_to_json(cfg, 2));
  });
}

tkws_status tkws_model_build(const char* config_json, uint64_t seed, tkws_model** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = new tkws_model{tinykws::Model::build(tinykws::parse_config(config_json), seed)};
  });
}

tkws_status tkws_model_build_file(const char* config_path, uint64_t seed, tkws_model** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = new tkws_model{tinykws::Model::build(tinykws::load_config(config_path), seed)};
  });
}

tkws_status tkws_model_load(const char* path, tkws_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tkws_model{tinykws::load_model(path)};
  });
}

tkws_status tkws_model_save(const tkws_model* model, const char* path, int f32) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    tinykws::save_model(model->model, path,
                        f32 ? tinykws::BlobEncoding::kF32 : tinykws::BlobEncoding::kF64);
  });
}

void tkws_model_free(tkws_model* model) { delete model; }

tkws_status tkws_model_param_count(const tkws_model* model, size_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model.parameter_count();
  });
}

tkws_status tkws_model_n_classes(const tkws_model* model, size_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model.config().n_classes;
  });
}

tkws_status tkws_model_config_json(const tkws_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup_string(tinykws::config_to_json(model->model.config(), 2));
  });
}

tkws_status tkws_model_predict(const tkws_model* model, const double* input, size_t n, int f32,
                               double* probs, size_t probs_len) {
  return guarded([&] {
    require(model, "model");
    require(input, "input");
    require(probs, "probs");
    const auto& cfg = model->model.config();
    if (probs_len != n * cfg.n_classes) {
      throw tinykws::InvalidArgument("probs buffer holds " + std::to_string(probs_len) +
                                     " values, need " + std::to_string(n * cfg.n_classes));
    }
    const tinykws::Shape shape{n, cfg.input_shape.c, cfg.input_shape.h, cfg.input_shape.w};
    tinykws::Tensor x(shape, std::vector<double>(input, input + shape.numel()));
    const auto out = model->model.predict(
        x, f32 ? tinykws::Precision::kF32 : tinykws::Precision::kF64);
    std::copy(out.data().begin(), out.data().end(), probs);
  });
}

tkws_status tkws_model_quantize(tkws_model* model, int bits, char** report_json) {
  return guarded([&] {
    require(model, "model");
    const auto r = tinykws::quantize_model(model->model, bits);
    if (report_json) {
      nlohmann::json j{{"bits", r.bits},
                       {"quantized_tensors", r.quantized_tensors},
                       {"quantized_values", r.quantized_values},
                       {"params", r.total_params},
                       {"model_size_kbits", r.model_size_kbits},
                       {"max_abs_error", r.max_abs_error}};
      *report_json = dup_string(j.dump(2));
    }
  });
}

tkws_status tkws_analyze(const char* config_json, const size_t* input_shape, int bits,
                         double val_acc, char** report_json, char** table) {
  return guarded([&] {
    require(config_json, "config_json");
    const auto cfg = tinykws::parse_config(config_json);
    std::optional<tinykws::Shape> shape;
    if (input_shape) shape = tinykws::Shape{input_shape[0], input_shape[1], input_shape[2], input_shape[3]};
    std::optional<int> b;
    if (bits > 0) b = bits;
    const auto report = tinykws::analyze(cfg, shape, b);
    std::optional<tinykws::ConstraintVerdict> verdict;
    if (val_acc >= 0.0) {
      tinykws::ConstraintSpec spec;
      spec.micro_ops_only = cfg.micro_ops_only;
      verdict = tinykws::check_constraints(report, val_acc, spec, cfg);
    }
    if (report_json) *report_json = dup_string(tinykws::report_to_json(report, verdict, 2));
    if (table) *table = dup_string(tinykws::report_table(report, verdict));
  });
}

tkws_status tkws_featurize_wav(const char* path, size_t* frames, size_t* coeffs, double** values) {
  return guarded([&] {
    require(path, "path");
    require(frames, "frames");
    require(coeffs, "coeffs");
    require(values, "values");
    const auto clip = tinykws::read_wav(path);
    tinykws::FrontendConfig cfg;
    if (static_cast<double>(clip.sample_rate) != cfg.sample_rate) {
      throw tinykws::InvalidArgument(std::string(path) + ": sample rate " +
                                     std::to_string(clip.sample_rate) +
                                     " Hz, expected 16000 Hz (resampling is not supported)");
    }
    const auto stack = tinykws::MfccExtractor(cfg)(clip.samples);
    auto* buf = static_cast<double*>(std::malloc(stack.values.size() * sizeof(double)));
    if (buf == nullptr) throw std::bad_alloc();
    std::copy(stack.values.begin(), stack.values.end(), buf);
    *frames = stack.frames;
    *coeffs = stack.coeffs;
    *values = buf;
  });
}

tkws_status tkws_dataset_scan(const char* root, const char* labels, int map_unknown,
                              tkws_dataset** out) {
  return guarded([&] {
    require(root, "root");
    require(out, "out");
    tinykws::ScanOptions opts;
    opts.labels = split_labels(labels);
    opts.map_unknown = map_unknown != 0;
    const auto manifest = tinykws::scan_dataset(root, opts);
    auto* ds = new tkws_dataset{tinykws::featurize_manifest(manifest), manifest.to_json(2)};
    *out = ds;
  });
}

tkws_status tkws_dataset_synthetic(size_t n_classes, size_t n_per_class, uint64_t seed,
                                   tkws_dataset** out) {
  return guarded([&] {
    require(out, "out");
    if (n_per_class == 0) throw tinykws::InvalidArgument("synthetic dataset needs clips per class");
    const auto clips = tinykws::synth_dataset(n_per_class, n_classes, seed);
    std::vector<std::string> labels;
    for (size_t k = 0; k < n_classes; ++k) labels.push_back("class" + std::to_string(k));
    nlohmann::json j;
    j["labels"] = labels;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& c : clips) {
      entries.push_back({{"path", c.name},
                         {"label", labels[static_cast<size_t>(c.label)]},
                         {"split", std::string(tinykws::split_name(c.split))}});
    }
    j["entries"] = std::move(entries);
    *out = new tkws_dataset{tinykws::featurize_clips(clips, labels), j.dump(2)};
  });
}

tkws_status tkws_dataset_manifest_json(const tkws_dataset* ds, char** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = dup_string(ds->manifest_json);
  });
}

tkws_status tkws_dataset_labels_json(const tkws_dataset* ds, char** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = dup_string(nlohmann::json(ds->splits.labels).dump());
  });
}

tkws_status tkws_dataset_split_size(const tkws_dataset* ds, tkws_split split, size_t* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = ds->splits.split(to_split(split)).size();
  });
}

void tkws_dataset_free(tkws_dataset* ds) { delete ds; }

void tkws_train_options_default(tkws_train_options* options) {
  if (options == nullptr) return;
  const tinykws::TrainOptions d;
  options->epochs = d.epochs;
  options->batch_size = d.batch_size;
  options->lr = d.lr;
  options->momentum = d.momentum;
  options->seed = d.seed;
  options->checkpoint_dir = nullptr;
  options->on_epoch = nullptr;
  options->user = nullptr;
}

tkws_status tkws_train(tkws_model* model, const tkws_dataset* ds, const tkws_train_options* options,
                       char** report_json, char** report_csv, double* wall_seconds) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    check_labels(model->model, ds->splits);
    tkws_train_options o;
    tkws_train_options_default(&o);
    if (options) o = *options;
    tinykws::TrainOptions t;
    t.epochs = o.epochs;
    t.batch_size = o.batch_size;
    t.lr = o.lr;
    t.momentum = o.momentum;
    t.seed = o.seed;
    if (o.checkpoint_dir) t.checkpoint_dir = o.checkpoint_dir;
    if (o.on_epoch) {
      t.on_epoch = [&o](const tinykws::EpochMetrics& e) {
        o.on_epoch(o.user, e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy);
      };
    }
    const auto report = tinykws::train(model->model, ds->splits, t);
    if (report_json) *report_json = dup_string(report.to_json(false, 2));
    if (report_csv) *report_csv = dup_string(report.to_csv());
    if (wall_seconds) *wall_seconds = report.wall_seconds;
  });
}

tkws_status tkws_evaluate(const tkws_model* model, const tkws_dataset* ds, tkws_split split,
                          int f32, double* accuracy) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    require(accuracy, "accuracy");
    check_labels(model->model, ds->splits);
    *accuracy = tinykws::evaluate(model->model, ds->splits.split(to_split(split)),
                                  f32 ? tinykws::Precision::kF32 : tinykws::Precision::kF64);
  });
}

}  // extern "C"
