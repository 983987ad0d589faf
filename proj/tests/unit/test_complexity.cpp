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

#include "json.hpp"
#include "oracles.hpp"
#include "tinykws/complexity.hpp"
#include "tinykws/error.hpp"
#include "tinykws/model.hpp"

namespace tinykws {
namespace {

const std::string kConfigDir = std::string(TINYKWS_SOURCE_DIR) + "/configs/";

TEST(Complexity, ModelSizeArithmetic) {
  EXPECT_EQ(model_size_kbits(6100, 8), 48.8);
  EXPECT_EQ(model_size_kbits(2700, 8), 21.6);
  EXPECT_EQ(model_size_kbits(10800, 8), 86.4);
  EXPECT_EQ(model_size_kbits(1000, 32), 32.0);
  EXPECT_THROW(model_size_kbits(10, 7), InvalidArgument);
}

TEST(Complexity, ConvClosedForms) {
  EXPECT_EQ(conv_param_count(1, 24, 1, {3, 3}), 24u * 9u + 24u);
  EXPECT_EQ(conv_param_count(24, 20, 4, {3, 3}), 20u * 6u * 9u + 20u);
  EXPECT_EQ(conv_mult_adds(Shape{1, 24, 98, 40}, 1, 1, {3, 3}), 24ull * 9 * 98 * 40);
}

TEST(Complexity, ConvMultAddsMatchLoopCount) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t g = 1 + rng.below(3);
    const std::size_t cin = g * (1 + rng.below(3)), cout = g * (1 + rng.below(3));
    const Window2 k{1 + rng.below(3), 1 + rng.below(3)};
    const std::size_t sh = 1 + rng.below(2), sw = 1 + rng.below(2);
    const bool same = rng.below(2) == 1;
    const Tensor x(Shape{1, cin, k.h + rng.below(6), k.w + rng.below(6)});
    const Tensor w(Shape{cout, cin / g, k.h, k.w});
    const Tensor b(Shape{cout, 1, 1, 1});
    std::uint64_t counted = 0;
    const Tensor y = testing::naive_conv2d(x, w, b, g, sh, sw, same, &counted);
    EXPECT_EQ(conv_mult_adds(y.shape(), cin, g, k), counted) << "case " << t;
  }
}

TEST(Complexity, CountsMatchRegistryForTemplates) {
  for (const char* name : {"x", "y", "z", "m", "synth"}) {
    const ModelConfig cfg = load_config(kConfigDir + "tinyspeech-" + name + ".cfg");
    EXPECT_EQ(testing::counted_params_per_layer(cfg), testing::registry_params_per_layer(cfg)) << name;
    EXPECT_EQ(analyze(cfg).total_params, Model::build(cfg, 0).parameter_count()) << name;
  }
}

TEST(Complexity, CountsMatchRegistryForRandomConfigs) {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const ModelConfig cfg = testing::random_valid_config(rng);
    EXPECT_EQ(testing::counted_params_per_layer(cfg), testing::registry_params_per_layer(cfg)) << config_to_json(cfg);
  }
}

TEST(Complexity, CondenserRowByHand) {
  // C = 4, c1 = 4, groups 2, 3x3 embed on a 5x4 condensed map of a 10x8 input.
  const ModelConfig cfg = parse_config(R"({"n_classes": 2, "input_shape": [1, 1, 10, 8],
    "layers": [{"type": "conv", "channels": 4, "kernel": 1},
               {"type": "attention_condenser", "c1": 4, "c2": 4, "groups": 2},
               {"type": "global_avg_pool"}, {"type": "dense", "units": 2}, {"type": "softmax"}]})");
  const auto params = count_params(cfg);
  const auto madds = count_mult_adds(cfg, cfg.input_shape);
  ASSERT_EQ(params[1].name, "layers.1.attention_condenser");
  EXPECT_EQ(params[1].params, (4u * 2u * 9u + 4u) + (4u * 4u + 4u) + 1u);
  EXPECT_EQ(madds[1].mult_adds, 4ull * 2 * 9 * 20 + 4ull * 4 * 20 + 2ull * 4 * 80);
}

TEST(Complexity, TemplateBudgetsWithinFivePercent) {
  const std::pair<const char*, double> budgets[] = {{"x", 10800}, {"y", 6100}, {"z", 2700}, {"m", 4700}};
  for (const auto& [name, target] : budgets) {
    const double p = static_cast<double>(analyze(load_config(kConfigDir + "tinyspeech-" + name + ".cfg")).total_params);
    EXPECT_LE(std::abs(p - target) / target, 0.05) << name << " has " << p;
  }
}

TEST(Constraints, Indicator) {
  ComplexityReport r;
  r.total_params = 10800;
  r.weight_bits = 8;
  const ModelConfig none;
  EXPECT_TRUE(check_constraints(r, 0.946, {}, none).pass);
  EXPECT_FALSE(check_constraints(r, 0.899, {}, none).pass);
  EXPECT_TRUE(check_constraints(r, 0.90, {}, none).pass);
  r.total_params = 15000;
  EXPECT_FALSE(check_constraints(r, 0.946, {}, none).pass);
  r.total_params = 14999;
  EXPECT_TRUE(check_constraints(r, 0.946, {}, none).pass);
  r.weight_bits = 32;
  EXPECT_FALSE(check_constraints(r, 0.946, {}, none).pass);
}

TEST(Constraints, MicroOpsRejectsBatchNorm) {
  const ModelConfig x = load_config(kConfigDir + "tinyspeech-x.cfg");
  ConstraintSpec spec;
  spec.micro_ops_only = true;
  ComplexityReport r = analyze(x, std::nullopt, 8);
  const auto v = check_constraints(r, 0.95, spec, x);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.checks.back().name, "micro_ops");
  const ModelConfig m = load_config(kConfigDir + "tinyspeech-m.cfg");
  EXPECT_TRUE(check_constraints(analyze(m, std::nullopt, 8), 0.95, spec, m).pass);
}

TEST(Complexity, JsonSchema) {
  const ModelConfig z = load_config(kConfigDir + "tinyspeech-z.cfg");
  const auto report = analyze(z, Shape{1, 1, 98, 40}, 8);
  const auto j = nlohmann::json::parse(report_to_json(report, check_constraints(report, 0.92, {}, z)));
  EXPECT_EQ(j["totals"]["params"], report.total_params);
  EXPECT_EQ(j["layers"].size(), report.layers.size());
  EXPECT_EQ(j["model_size_kbits"], 21.64);
  EXPECT_EQ(j["input_shape"], nlohmann::json({1, 1, 98, 40}));
  EXPECT_TRUE(j["constraints"]["pass"].get<bool>());
  EXPECT_NE(report_table(report).find("total"), std::string::npos);
}

TEST(Complexity, MultAddsScaleWithBatch) {
  const ModelConfig z = load_config(kConfigDir + "tinyspeech-z.cfg");
  EXPECT_EQ(analyze(z, Shape{4, 1, 98, 40}).total_mult_adds, 4 * analyze(z).total_mult_adds);
}

}  // namespace
}  // namespace tinykws
