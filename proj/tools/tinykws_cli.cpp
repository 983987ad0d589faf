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

// tinykws command line front end. Everything goes through the C API.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tinykws/tinykws.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Carries a C API failure (or a CLI-level one) out to main.
struct CliFailure {
  int exit_code;
  std::string message;
};

int exit_code_for(tkws_status s) {
  switch (s) {
    case TKWS_OK:
      return kExitOk;
    case TKWS_IO_ERROR:
    case TKWS_FORMAT_ERROR:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

void check(tkws_status s, const std::string& context) {
  if (s != TKWS_OK) throw CliFailure{exit_code_for(s), context + ": " + tkws_last_error()};
}

[[noreturn]] void invalid(const std::string& message) { throw CliFailure{kExitValidation, message}; }

struct StringDeleter {
  void operator()(char* s) const { tkws_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct ModelDeleter {
  void operator()(tkws_model* m) const { tkws_model_free(m); }
};
using ModelPtr = std::unique_ptr<tkws_model, ModelDeleter>;

struct DatasetDeleter {
  void operator()(tkws_dataset* d) const { tkws_dataset_free(d); }
};
using DatasetPtr = std::unique_ptr<tkws_dataset, DatasetDeleter>;

std::string take(char* s) {
  CString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{kExitIo, "cannot read " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliFailure{kExitIo, "cannot write " + path};
  out << text;
  if (!out) throw CliFailure{kExitIo, "write to " + path + " failed"};
}

void emit(const std::string& out_path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

std::vector<std::size_t> parse_int_list(const std::string& text, char sep, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || item[0] == '-') {
      invalid(std::string("malformed ") + what + " \"" + text + "\"");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// --data / --synthetic selection shared by train and eval.
struct DataArgs {
  std::string data;
  std::string synthetic;
  std::string labels;
  bool map_unknown = false;
  std::uint64_t data_seed = 0;

  void add_to(CLI::App* app) {
    auto* d = app->add_option("--data", data, "Dataset root (one directory per label of 16 kHz WAVs)");
    auto* s = app->add_option("--synthetic", synthetic, "Synthetic tone dataset KxN: K classes, N clips each");
    d->excludes(s);
    app->add_option("--labels", labels, "Comma-separated label list in class order (default: every directory)");
    app->add_flag("--map-unknown", map_unknown, "Collect other directories into a trailing _unknown_ class");
    app->add_option("--data-seed", data_seed, "Seed for the synthetic dataset");
  }

  DatasetPtr load() const {
    tkws_dataset* ds = nullptr;
    if (!synthetic.empty()) {
      const auto kn = parse_int_list(synthetic, 'x', "--synthetic (expected KxN)");
      if (kn.size() != 2) invalid("--synthetic expects KxN, got \"" + synthetic + "\"");
      check(tkws_dataset_synthetic(kn[0], kn[1], data_seed, &ds), "synthetic dataset");
    } else if (!data.empty()) {
      check(tkws_dataset_scan(data.c_str(), labels.empty() ? nullptr : labels.c_str(),
                              map_unknown ? 1 : 0, &ds),
            "dataset " + data);
    } else {
      invalid("one of --data or --synthetic is required");
    }
    return DatasetPtr(ds);
  }
};

tkws_split parse_split_name(const std::string& s) {
  if (s == "train") return TKWS_SPLIT_TRAIN;
  if (s == "val") return TKWS_SPLIT_VAL;
  if (s == "test") return TKWS_SPLIT_TEST;
  invalid("--split must be train, val or test");
}

// featurize -----------------------------------------------------------------

struct FeaturizeArgs {
  std::string wav;
  std::string dir;
  std::string out;
  bool csv = false;
};

void write_features(const std::string& path, std::size_t frames, std::size_t coeffs,
                    const double* values, bool csv) {
  if (csv) {
    std::ostringstream os;
    os.precision(9);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < coeffs; ++k) os << (k ? "," : "") << values[t * coeffs + k];
      os << '\n';
    }
    write_text(path, os.str());
    return;
  }
  // u32 frames | u32 coeffs | little-endian binary32 values, row major.
  std::string bytes;
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(static_cast<std::uint32_t>(frames));
  put_u32(static_cast<std::uint32_t>(coeffs));
  for (std::size_t i = 0; i < frames * coeffs; ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof(u));
    put_u32(u);
  }
  write_text(path, bytes);
}

void featurize_one(const std::string& wav, const std::string& out, bool csv) {
  std::size_t frames = 0, coeffs = 0;
  double* values = nullptr;
  check(tkws_featurize_wav(wav.c_str(), &frames, &coeffs, &values), "featurize " + wav);
  std::unique_ptr<double, void (*)(double*)> owned(values, tkws_buffer_free);
  write_features(out, frames, coeffs, values, csv);
}

int run_featurize(const FeaturizeArgs& a) {
  if (a.wav.empty() == a.dir.empty()) invalid("exactly one of --wav or --dir is required");
  if (!a.wav.empty()) {
    featurize_one(a.wav, a.out, a.csv);
    std::cerr << "wrote " << a.out << "\n";
    return kExitOk;
  }
  std::error_code ec;
  if (!fs::is_directory(a.dir, ec)) throw CliFailure{kExitIo, a.dir + " is not a directory"};
  std::vector<fs::path> wavs;
  for (const auto& e : fs::recursive_directory_iterator(a.dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end());
  for (const auto& w : wavs) {
    fs::path rel = fs::relative(w, a.dir);
    rel.replace_extension(a.csv ? ".csv" : ".mfcc");
    featurize_one(w.string(), (fs::path(a.out) / rel).string(), a.csv);
  }
  std::cerr << "featurized " << wavs.size() << " files into " << a.out << "\n";
  return kExitOk;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  DataArgs data;
  std::size_t epochs = 50;
  std::size_t batch = 64;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  std::string checkpoint_dir;
  std::string out;
  std::string csv;
  std::string save_model;
};

void print_epoch(void*, size_t epoch, double loss, double train_acc, double val_acc) {
  std::fprintf(stderr, "epoch %3zu  loss %.4f  train_acc %.4f  val_acc %.4f\n", epoch, loss,
               train_acc, val_acc);
}

int run_train(const TrainArgs& a) {
  tkws_model* raw = nullptr;
  check(tkws_model_build_file(a.config.c_str(), a.seed, &raw), "config " + a.config);
  ModelPtr model(raw);
  DatasetPtr ds = a.data.load();

  tkws_train_options o;
  tkws_train_options_default(&o);
  o.epochs = a.epochs;
  o.batch_size = a.batch;
  o.lr = a.lr;
  o.momentum = a.momentum;
  o.seed = a.seed;
  o.checkpoint_dir = a.checkpoint_dir.empty() ? nullptr : a.checkpoint_dir.c_str();
  o.on_epoch = print_epoch;

  char* report = nullptr;
  char* csv = nullptr;
  double wall = 0.0;
  check(tkws_train(model.get(), ds.get(), &o, &report, &csv, &wall), "train");
  const std::string report_text = take(report);
  const std::string csv_text = take(csv);

  std::size_t params = 0;
  check(tkws_model_param_count(model.get(), &params), "param count");
  json j = json::parse(report_text);
  j["params"] = params;
  j["config"] = json::parse(take([&] {
    char* c = nullptr;
    check(tkws_model_config_json(model.get(), &c), "config");
    return c;
  }()));
  j["hyperparameters"] = {{"epochs", a.epochs}, {"batch", a.batch}, {"lr", a.lr},
                          {"momentum", a.momentum}, {"seed", a.seed}};
  if (!a.csv.empty()) write_text(a.csv, csv_text);
  if (!a.save_model.empty()) {
    check(tkws_model_save(model.get(), a.save_model.c_str(), 0), "save " + a.save_model);
  }
  emit(a.out, j);
  std::fprintf(stderr, "wall time %.2f s\n", wall);
  return kExitOk;
}

// eval ----------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> models;
  DataArgs data;
  std::string split = "test";
  bool f32 = false;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const tkws_split split = parse_split_name(a.split);
  std::vector<ModelPtr> models;
  for (const auto& path : a.models) {
    tkws_model* m = nullptr;
    check(tkws_model_load(path.c_str(), &m), "load " + path);
    models.emplace_back(m);
  }
  DatasetPtr ds = a.data.load();
  std::size_t n = 0;
  check(tkws_dataset_split_size(ds.get(), split, &n), "dataset");
  json rows = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    double acc = 0.0;
    check(tkws_evaluate(models[i].get(), ds.get(), split, a.f32 ? 1 : 0, &acc),
          "evaluate " + a.models[i]);
    json cfg = json::parse(take([&] {
      char* c = nullptr;
      check(tkws_model_config_json(models[i].get(), &c), "config");
      return c;
    }()));
    rows.push_back({{"model", a.models[i]},
                    {"weight_bits", cfg["weight_bits"]},
                    {"accuracy", acc}});
    std::fprintf(stderr, "%-40s bits %-2d accuracy %.4f (%zu samples)\n", a.models[i].c_str(),
                 cfg["weight_bits"].get<int>(), acc, n);
  }
  emit(a.out, json{{"split", a.split}, {"samples", n}, {"precision", a.f32 ? "f32" : "f64"},
                   {"results", rows}});
  return kExitOk;
}

// analyze -------------------------------------------------------------------

struct AnalyzeArgs {
  std::string config;
  std::string input_shape;
  int bits = 0;
  bool check_constraints = false;
  std::optional<double> val_acc;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const std::string text = read_text(a.config);
  std::vector<std::size_t> shape;
  if (!a.input_shape.empty()) {
    shape = parse_int_list(a.input_shape, ',', "--input-shape (expected N,C,H,W)");
    if (shape.size() != 4) invalid("--input-shape expects N,C,H,W");
  }
  if (a.check_constraints && !a.val_acc) invalid("--check-constraints requires --val-acc");
  const double val = a.check_constraints ? *a.val_acc : -1.0;
  char* report = nullptr;
  char* table = nullptr;
  check(tkws_analyze(text.c_str(), shape.empty() ? nullptr : shape.data(), a.bits, val, &report,
                     &table),
        "analyze " + a.config);
  const std::string report_text = take(report);
  std::cout << take(table);
  if (!a.out.empty()) write_text(a.out, report_text + "\n");
  return kExitOk;
}

// quantize / export ---------------------------------------------------------

struct QuantizeArgs {
  std::string model;
  int bits = 8;
  std::string out;
  std::string report;
};

int run_quantize(const QuantizeArgs& a) {
  tkws_model* m = nullptr;
  check(tkws_model_load(a.model.c_str(), &m), "load " + a.model);
  ModelPtr model(m);
  char* report = nullptr;
  check(tkws_model_quantize(model.get(), a.bits, &report), "quantize");
  const std::string text = take(report);
  check(tkws_model_save(model.get(), a.out.c_str(), 0), "save " + a.out);
  if (!a.report.empty()) write_text(a.report, text + "\n");
  std::cout << text << "\n";
  return kExitOk;
}

struct ExportArgs {
  std::string model;
  std::string out;
};

int run_export(const ExportArgs& a) {
  tkws_model* m = nullptr;
  check(tkws_model_load(a.model.c_str(), &m), "load " + a.model);
  ModelPtr model(m);
  check(tkws_model_save(model.get(), a.out.c_str(), 1), "export " + a.out);
  std::cout << "format version " << tkws_format_version() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tinykws: keyword spotting with attention condensers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tinykws model format " + std::to_string(tkws_format_version()));

  FeaturizeArgs fa;
  auto* featurize = app.add_subcommand("featurize", "Compute MFCC stacks from WAV files");
  auto* wav_opt = featurize->add_option("--wav", fa.wav, "Single 16 kHz mono WAV file");
  featurize->add_option("--dir", fa.dir, "Directory searched recursively for WAV files")->excludes(wav_opt);
  featurize->add_option("--out", fa.out, "Output file (--wav) or directory (--dir)")->required();
  featurize->add_flag("--csv", fa.csv, "Write CSV instead of the binary feature format");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model described by a config file");
  train->add_option("--config", ta.config, "Model config (JSON)")->required();
  ta.data.add_to(train);
  train->add_option("--epochs", ta.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch", ta.batch, "Mini-batch size")->capture_default_str();
  train->add_option("--lr", ta.lr, "Learning rate")->capture_default_str();
  train->add_option("--momentum", ta.momentum, "SGD momentum")->capture_default_str();
  train->add_option("--seed", ta.seed, "Seed for initialization and shuffling")->capture_default_str();
  train->add_option("--checkpoint-dir", ta.checkpoint_dir, "Write a model file after every epoch");
  train->add_option("--out", ta.out, "Metrics JSON (default: stdout)");
  train->add_option("--csv", ta.csv, "Per-epoch metrics CSV");
  train->add_option("--save-model", ta.save_model, "Write the trained model here");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Measure accuracy of one or more models");
  eval->add_option("--model", ea.models, "Model file; repeat to compare models")->required();
  ea.data.add_to(eval);
  eval->add_option("--split", ea.split, "train, val or test")->capture_default_str();
  eval->add_flag("--f32", ea.f32, "Run the binary32 inference path");
  eval->add_option("--out", ea.out, "Results JSON (default: stdout)");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Per-layer parameter and mult-add counts");
  analyze->add_option("--config", aa.config, "Model config (JSON)")->required();
  analyze->add_option("--input-shape", aa.input_shape, "Input shape N,C,H,W (default: from config)");
  analyze->add_option("--bits", aa.bits, "Weight width for the size estimate (4, 8, 16, 32)");
  analyze->add_flag("--check-constraints", aa.check_constraints, "Evaluate the deployment constraints");
  analyze->add_option("--val-acc", aa.val_acc, "Validation accuracy used by --check-constraints");
  analyze->add_option("--out", aa.out, "Report JSON");

  QuantizeArgs qa;
  auto* quantize = app.add_subcommand("quantize", "Post-training weight quantization");
  quantize->add_option("--model", qa.model, "Input model file")->required();
  quantize->add_option("--bits", qa.bits, "4, 8 or 32 (pass-through)")->capture_default_str();
  quantize->add_option("--out", qa.out, "Output model file")->required();
  quantize->add_option("--report", qa.report, "Quantization report JSON");

  ExportArgs xa;
  auto* exporter = app.add_subcommand("export", "Write a compact binary32 model file");
  exporter->add_option("--model", xa.model, "Input model file")->required();
  exporter->add_option("--out", xa.out, "Output model file")->required();

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
    return kExitValidation;
  }

  try {
    if (*featurize) return run_featurize(fa);
    if (*train) return run_train(ta);
    if (*eval) return run_eval(ea);
    if (*analyze) return run_analyze(aa);
    if (*quantize) return run_quantize(qa);
    if (*exporter) return run_export(xa);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
