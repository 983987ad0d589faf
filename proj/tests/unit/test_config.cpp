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

#include <string>

#include "tinykws/config.hpp"
#include "tinykws/error.hpp"

namespace tinykws {
namespace {

const std::string kConfigDir = std::string(TINYKWS_SOURCE_DIR) + "/configs/";

const char* kSmall = R"({
  "name": "small", "n_classes": 3, "input_shape": [1, 1, 10, 8],
  "layers": [
    {"type": "conv", "channels": 4, "kernel": 3, "batch_norm": true},
    {"type": "attention_condenser", "c1": 6, "c2": 4, "pool": 2},
    {"type": "conv", "channels": 5, "kernel": [3, 3], "stride": [2, 2]},
    {"type": "global_avg_pool"},
    {"type": "dense", "units": 3},
    {"type": "softmax"}
  ]})";

template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesAndInfersShapes) {
  const ModelConfig cfg = parse_config(kSmall);
  ASSERT_EQ(cfg.layers.size(), 6u);
  const auto shapes = infer_shapes(cfg);
  EXPECT_EQ(shapes[0].out, (Shape{1, 4, 10, 8}));
  EXPECT_EQ(shapes[1].out, (Shape{1, 4, 10, 8}));
  EXPECT_EQ(shapes[1].condensed, (Window2{5, 4}));
  EXPECT_EQ(shapes[2].out, (Shape{1, 5, 5, 4}));
  EXPECT_EQ(shapes[3].out, (Shape{1, 5, 1, 1}));
  EXPECT_EQ(shapes[5].out, (Shape{1, 3, 1, 1}));
  EXPECT_EQ(resolved_groups(std::get<CondenserSpec>(cfg.layers[1]), 4), 2u);
}

TEST(Config, ShapeChainForAnotherInput) {
  const auto shapes = infer_shapes(parse_config(kSmall), Shape{4, 1, 98, 40});
  EXPECT_EQ(shapes[2].out, (Shape{4, 5, 49, 20}));
}

TEST(Config, CanonicalJsonRoundTrips) {
  const ModelConfig cfg = parse_config(kSmall);
  const std::string a = config_to_json(cfg);
  const std::string b = config_to_json(parse_config(a));
  EXPECT_EQ(a, b);
}

TEST(Config, UnknownKeysAreRejected) {
  std::string text = kSmall;
  text.replace(text.find("\"batch_norm\""), 12, "\"batch_nrom\"");
  EXPECT_NE(error_of([&] { parse_config(text); }).find("batch_nrom"), std::string::npos);
  EXPECT_THROW(parse_config(R"({"n_classes": 2, "layers": [], "extra": 1})"), InvalidArgument);
}

TEST(Config, MalformedJsonIsValidationError) {
  EXPECT_THROW(parse_config("{not json"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"n_classes": 2, "layers": [{"type": "lstm"}]})"), InvalidArgument);
}

TEST(Config, MicroOpsRejectsBatchNormNamingTheLayer) {
  std::string text = kSmall;
  text.replace(text.find("\"n_classes\""), 0, "\"micro_ops_only\": true, ");
  try {
    infer_shapes(parse_config(text));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.layer(), 0u);
    EXPECT_NE(std::string(e.what()).find("batch normalization"), std::string::npos);
  }
}

TEST(Config, CondenserC2MustMatchChannels) {
  std::string text = kSmall;
  text.replace(text.find("\"c2\": 4"), 7, "\"c2\": 5");
  try {
    infer_shapes(parse_config(text));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.layer(), 1u);
  }
}

TEST(Config, HeadMustBeDenseThenSoftmax) {
  ModelConfig cfg = parse_config(kSmall);
  cfg.layers.pop_back();
  EXPECT_THROW(infer_shapes(cfg), ConfigError);
  cfg = parse_config(kSmall);
  std::get<DenseSpec>(cfg.layers[4]).units = 4;
  EXPECT_THROW(infer_shapes(cfg), ConfigError);
}

TEST(Config, RejectsBadWeightBitsAndClasses) {
  ModelConfig cfg = parse_config(kSmall);
  cfg.weight_bits = 7;
  EXPECT_THROW(infer_shapes(cfg), InvalidArgument);
  cfg = parse_config(kSmall);
  cfg.n_classes = 1;
  EXPECT_THROW(infer_shapes(cfg), InvalidArgument);
  cfg = parse_config(kSmall);
  cfg.labels = {"a", "b"};
  EXPECT_THROW(infer_shapes(cfg), InvalidArgument);
}

TEST(Config, KernelThatDoesNotFitIsRejected) {
  ModelConfig cfg = parse_config(kSmall);
  auto& conv = std::get<ConvSpec>(cfg.layers[0]);
  conv.padding = Padding::kValid;
  conv.kernel = {11, 3};
  EXPECT_THROW(infer_shapes(cfg), ConfigError);
}

TEST(Config, GroupsMustDivide) {
  ModelConfig cfg = parse_config(kSmall);
  std::get<CondenserSpec>(cfg.layers[1]).groups = 3;
  EXPECT_THROW(infer_shapes(cfg), ConfigError);
}

TEST(Config, LoadMissingFileIsIoError) {
  EXPECT_THROW(load_config(kConfigDir + "does-not-exist.cfg"), IoError);
}

TEST(Config, ShippedTemplatesPassTheShapeChain) {
  for (const char* name : {"x", "y", "z", "m", "synth"}) {
    const ModelConfig cfg = load_config(kConfigDir + "tinyspeech-" + name + ".cfg");
    const auto shapes = infer_shapes(cfg);
    EXPECT_EQ(shapes.back().out.c, cfg.n_classes) << name;
  }
  EXPECT_TRUE(load_config(kConfigDir + "tinyspeech-m.cfg").micro_ops_only);
}

}  // namespace
}  // namespace tinykws
