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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tinykws/tinykws.h"

namespace {

const std::string kConfigDir = std::string(TINYKWS_SOURCE_DIR) + "/configs/";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tinykws_capi_" + name)).string();
}

std::string take(char* s) {
  std::string out = s ? s : "";
  tkws_string_free(s);
  return out;
}

TEST(CApi, FormatVersion) { EXPECT_EQ(tkws_format_version(), 1u); }

TEST(CApi, InvalidConfigReportsValidationStatus) {
  tkws_model* m = nullptr;
  EXPECT_EQ(tkws_model_build("{\"n_classes\": 2, \"oops\": 1}", 0, &m), TKWS_INVALID_ARGUMENT);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(tkws_last_error()).find("oops"), std::string::npos);
  EXPECT_EQ(tkws_model_build(nullptr, 0, &m), TKWS_INVALID_ARGUMENT);
  EXPECT_EQ(tkws_config_validate("[1,2", nullptr), TKWS_INVALID_ARGUMENT);
}

TEST(CApi, MissingAndCorruptFiles) {
  tkws_model* m = nullptr;
  EXPECT_EQ(tkws_model_load("/nonexistent/model.tspn", &m), TKWS_IO_ERROR);
  const std::string path = temp_path("corrupt.tspn");
  ASSERT_EQ(tkws_model_build_file((kConfigDir + "tinyspeech-z.cfg").c_str(), 1, &m), TKWS_OK);
  ASSERT_EQ(tkws_model_save(m, path.c_str(), 0), TKWS_OK);
  tkws_model_free(m);
  std::string bytes = slurp(path);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(path, std::ios::binary) << bytes;
  m = nullptr;
  EXPECT_EQ(tkws_model_load(path.c_str(), &m), TKWS_FORMAT_ERROR);
  EXPECT_NE(std::string(tkws_last_error()).find("CRC"), std::string::npos);
  std::remove(path.c_str());
}

TEST(CApi, BuildPredictSaveLoad) {
  tkws_model* m = nullptr;
  ASSERT_EQ(tkws_model_build_file((kConfigDir + "tinyspeech-synth.cfg").c_str(), 3, &m), TKWS_OK);
  size_t params = 0, k = 0;
  ASSERT_EQ(tkws_model_param_count(m, &params), TKWS_OK);
  ASSERT_EQ(tkws_model_n_classes(m, &k), TKWS_OK);
  EXPECT_EQ(params, 1572u);
  EXPECT_EQ(k, 3u);
  std::vector<double> x(2 * 98 * 40);
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * static_cast<double>(i));
  std::vector<double> p(6), q(6);
  ASSERT_EQ(tkws_model_predict(m, x.data(), 2, 0, p.data(), p.size()), TKWS_OK);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_EQ(tkws_model_predict(m, x.data(), 2, 0, p.data(), 5), TKWS_INVALID_ARGUMENT);

  const std::string path = temp_path("model.tspn");
  ASSERT_EQ(tkws_model_save(m, path.c_str(), 0), TKWS_OK);
  tkws_model* back = nullptr;
  ASSERT_EQ(tkws_model_load(path.c_str(), &back), TKWS_OK);
  ASSERT_EQ(tkws_model_predict(back, x.data(), 2, 0, q.data(), q.size()), TKWS_OK);
  EXPECT_EQ(p, q);
  ASSERT_EQ(tkws_model_predict(back, x.data(), 2, 1, q.data(), q.size()), TKWS_OK);
  for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-5);
  tkws_model_free(back);
  tkws_model_free(m);
  std::remove(path.c_str());
}

TEST(CApi, AnalyzeReturnsJsonAndTable) {
  const std::string cfg = slurp(kConfigDir + "tinyspeech-y.cfg");
  char* json = nullptr;
  char* table = nullptr;
  const size_t shape[4] = {1, 1, 98, 40};
  ASSERT_EQ(tkws_analyze(cfg.c_str(), shape, 8, 0.93, &json, &table), TKWS_OK);
  const std::string j = take(json), t = take(table);
  EXPECT_NE(j.find("\"model_size_kbits\""), std::string::npos);
  EXPECT_NE(j.find("\"constraints\""), std::string::npos);
  EXPECT_NE(t.find("total"), std::string::npos);
  EXPECT_EQ(tkws_analyze(cfg.c_str(), nullptr, 7, -1, &json, nullptr), TKWS_INVALID_ARGUMENT);
}

TEST(CApi, QuantizeReport) {
  tkws_model* m = nullptr;
  ASSERT_EQ(tkws_model_build_file((kConfigDir + "tinyspeech-z.cfg").c_str(), 1, &m), TKWS_OK);
  char* report = nullptr;
  ASSERT_EQ(tkws_model_quantize(m, 8, &report), TKWS_OK);
  EXPECT_NE(take(report).find("\"bits\": 8"), std::string::npos);
  EXPECT_EQ(tkws_model_quantize(m, 3, nullptr), TKWS_INVALID_ARGUMENT);
  tkws_model_free(m);
}

TEST(CApi, FeaturizeWav) {
  // 16 kHz mono PCM, 0.5 s of a 440 Hz tone.
  const uint32_t n = 8000;
  std::string wav = "RIFF";
  auto u32 = [&](uint32_t v) { for (int i = 0; i < 4; ++i) wav.push_back(static_cast<char>(v >> (8 * i))); };
  auto u16 = [&](uint16_t v) { for (int i = 0; i < 2; ++i) wav.push_back(static_cast<char>(v >> (8 * i))); };
  u32(36 + 2 * n);
  wav += "WAVEfmt ";
  u32(16); u16(1); u16(1); u32(16000); u32(32000); u16(2); u16(16);
  wav += "data";
  u32(2 * n);
  for (uint32_t i = 0; i < n; ++i) u16(static_cast<uint16_t>(static_cast<int16_t>(8000 * std::sin(2 * M_PI * 440 * i / 16000.0))));
  const std::string path = temp_path("tone.wav");
  std::ofstream(path, std::ios::binary) << wav;
  size_t frames = 0, coeffs = 0;
  double* values = nullptr;
  ASSERT_EQ(tkws_featurize_wav(path.c_str(), &frames, &coeffs, &values), TKWS_OK);
  EXPECT_EQ(frames, 98u);
  EXPECT_EQ(coeffs, 40u);
  EXPECT_TRUE(std::isfinite(values[0]));
  tkws_buffer_free(values);
  EXPECT_EQ(tkws_featurize_wav("/nonexistent.wav", &frames, &coeffs, &values), TKWS_IO_ERROR);
  std::ofstream(path, std::ios::binary) << "RIFF";
  EXPECT_EQ(tkws_featurize_wav(path.c_str(), &frames, &coeffs, &values), TKWS_FORMAT_ERROR);
  std::remove(path.c_str());
}

TEST(CApi, SyntheticTrainEvaluate) {
  tkws_dataset* ds = nullptr;
  ASSERT_EQ(tkws_dataset_synthetic(3, 20, 1, &ds), TKWS_OK);
  size_t train = 0, val = 0, test = 0;
  tkws_dataset_split_size(ds, TKWS_SPLIT_TRAIN, &train);
  tkws_dataset_split_size(ds, TKWS_SPLIT_VAL, &val);
  tkws_dataset_split_size(ds, TKWS_SPLIT_TEST, &test);
  EXPECT_EQ(train + val + test, 60u);
  char* manifest = nullptr;
  ASSERT_EQ(tkws_dataset_manifest_json(ds, &manifest), TKWS_OK);
  EXPECT_NE(take(manifest).find("class2/clip19_nohash_0.wav"), std::string::npos);

  tkws_model* m = nullptr;
  ASSERT_EQ(tkws_model_build_file((kConfigDir + "tinyspeech-synth.cfg").c_str(), 1, &m), TKWS_OK);
  tkws_train_options o;
  tkws_train_options_default(&o);
  EXPECT_EQ(o.epochs, 50u);
  EXPECT_EQ(o.batch_size, 64u);
  EXPECT_EQ(o.lr, 0.01);
  EXPECT_EQ(o.momentum, 0.9);
  o.epochs = 2;
  size_t epochs_seen = 0;
  o.user = &epochs_seen;
  o.on_epoch = [](void* user, size_t, double, double, double) { ++*static_cast<size_t*>(user); };
  char* json = nullptr;
  char* csv = nullptr;
  ASSERT_EQ(tkws_train(m, ds, &o, &json, &csv, nullptr), TKWS_OK) << tkws_last_error();
  EXPECT_EQ(epochs_seen, 2u);
  EXPECT_NE(take(json).find("\"best_epoch\""), std::string::npos);
  EXPECT_EQ(take(csv).rfind("epoch,train_loss", 0), 0u);
  double acc = -1;
  ASSERT_EQ(tkws_evaluate(m, ds, TKWS_SPLIT_VAL, 0, &acc), TKWS_OK);
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);

  tkws_dataset* wrong = nullptr;
  ASSERT_EQ(tkws_dataset_synthetic(4, 5, 1, &wrong), TKWS_OK);
  EXPECT_EQ(tkws_evaluate(m, wrong, TKWS_SPLIT_TRAIN, 0, &acc), TKWS_INVALID_ARGUMENT);
  tkws_dataset_free(wrong);
  tkws_model_free(m);
  tkws_dataset_free(ds);
}

TEST(CApi, ScanMissingRoot) {
  tkws_dataset* ds = nullptr;
  EXPECT_EQ(tkws_dataset_scan("/nonexistent/root", nullptr, 0, &ds), TKWS_IO_ERROR);
}

}  // namespace
