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
#include <set>

#include "oracles.hpp"
#include "tinykws/error.hpp"
#include "tinykws/model.hpp"

namespace tinykws {
namespace {

const char* kTiny = R"({
  "name": "tiny", "n_classes": 3, "input_shape": [1, 1, 8, 6],
  "layers": [
    {"type": "conv", "channels": 4, "kernel": 3, "batch_norm": true},
    {"type": "attention_condenser", "c1": 4, "c2": 4, "pool": 2},
    {"type": "conv", "channels": 3, "kernel": 3, "stride": 2},
    {"type": "global_avg_pool"},
    {"type": "dense", "units": 3},
    {"type": "softmax"}
  ]})";

TEST(Model, RegistryNamesAndCount) {
  const Model m = Model::build(parse_config(kTiny), 1);
  std::vector<std::string> names;
  std::size_t total = 0;
  for (const auto& p : m.parameters()) {
    names.push_back(p.name);
    total += p.tensor->size();
  }
  const std::vector<std::string> want{
      "layers.0.conv.weight", "layers.0.conv.bias", "layers.0.bn.gamma", "layers.0.bn.beta",
      "layers.1.condenser.embed1.weight", "layers.1.condenser.embed1.bias",
      "layers.1.condenser.embed2.weight", "layers.1.condenser.embed2.bias",
      "layers.1.condenser.scale_logit", "layers.2.conv.weight", "layers.2.conv.bias",
      "layers.4.dense.weight", "layers.4.dense.bias"};
  EXPECT_EQ(names, want);
  EXPECT_EQ(m.parameter_count(), total);
  EXPECT_EQ(m.buffers().size(), 2u);
  ASSERT_NE(m.find("layers.4.dense.bias"), nullptr);
  EXPECT_EQ(m.find("layers.9.dense.bias"), nullptr);
}

TEST(Model, BuildIsSeedDeterministic) {
  const ModelConfig cfg = parse_config(kTiny);
  const Model a = Model::build(cfg, 5), b = Model::build(cfg, 5), c = Model::build(cfg, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(*a.parameters()[i].tensor, *b.parameters()[i].tensor);
    differs |= !(*a.parameters()[i].tensor == *c.parameters()[i].tensor);
  }
  EXPECT_TRUE(differs);
}

TEST(Model, InitialState) {
  const Model m = Model::build(parse_config(kTiny), 1);
  EXPECT_EQ(*m.find("layers.0.bn.gamma"), Tensor(Shape{4, 1, 1, 1}, 1.0));
  EXPECT_EQ(*m.find("layers.0.conv.bias"), Tensor(Shape{4, 1, 1, 1}));
  EXPECT_EQ((*m.find("layers.1.condenser.scale_logit"))[0], 0.0);
}

TEST(Model, ForwardProducesDistributions) {
  Model m = Model::build(parse_config(kTiny), 2);
  Rng rng(3);
  const Tensor x = testing::random_tensor(Shape{5, 1, 8, 6}, rng);
  const Tensor p = m.predict(x);
  ASSERT_EQ(p.shape(), (Shape{5, 3, 1, 1}));
  for (std::size_t n = 0; n < 5; ++n) {
    EXPECT_NEAR(p[n * 3] + p[n * 3 + 1] + p[n * 3 + 2], 1.0, 1e-12);
  }
  EXPECT_THROW(m.predict(Tensor(Shape{1, 1, 8, 7})), ShapeError);
}

TEST(Model, InferLeavesBuffersAloneTrainUpdatesThem) {
  Model m = Model::build(parse_config(kTiny), 2);
  Rng rng(4);
  const Tensor x = testing::random_tensor(Shape{4, 1, 8, 6}, rng);
  const Tensor before = *m.find("layers.0.bn.running_mean");
  m.forward(x, Mode::kInfer);
  EXPECT_EQ(*m.find("layers.0.bn.running_mean"), before);
  const ForwardPass pass = m.forward(x, Mode::kTrain);
  EXPECT_FALSE(*m.find("layers.0.bn.running_mean") == before);
  EXPECT_EQ(pass.caches.size(), m.layers().size());
}

TEST(Model, F32PathTracksF64) {
  const Model m = Model::build(parse_config(kTiny), 7);
  Rng rng(8);
  const Tensor x = testing::random_tensor(Shape{3, 1, 8, 6}, rng);
  const Tensor a = m.predict(x, Precision::kF64);
  const Tensor b = m.predict(x, Precision::kF32);
  EXPECT_LT(max_abs_diff(a, b), 1e-5);
  for (double v : b.data()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(Model, BackwardNeedsTrainCaches) {
  Model m = Model::build(parse_config(kTiny), 1);
  const ForwardPass pass = m.forward(Tensor(Shape{1, 1, 8, 6}), Mode::kInfer);
  const std::vector<int> labels{0};
  EXPECT_THROW(m.backward(pass, labels), InvalidArgument);
}

TEST(Model, FullModelGradientsMatchCentralDifferences) {
  Model m = Model::build(parse_config(kTiny), 9);
  Rng rng(10);
  // Move every parameter off its initial value so no gradient is trivially zero.
  for (auto& p : m.parameters()) {
    for (auto& v : p.tensor->data()) v += rng.uniform(-0.3, 0.3);
  }
  const Tensor x = testing::random_tensor(Shape{3, 1, 8, 6}, rng);
  const std::vector<int> labels{0, 2, 1};
  const Model base = m;
  auto loss = [&] {
    Model copy = m;  // train mode touches running statistics
    return Model::mean_loss(copy.forward(x, Mode::kTrain).probs, labels);
  };
  Model tmp = base;
  const Gradients g = tmp.backward(tmp.forward(x, Mode::kTrain), labels);
  auto params = m.parameters();
  ASSERT_EQ(g.size(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto num = testing::numeric_gradient(*params[i].tensor, loss);
    const auto check = testing::compare_gradients(g[i], num);
    EXPECT_LT(check.max_rel_error, 1e-4) << params[i].name << " @ " << check.worst_index;
  }
}

TEST(Model, MeanLossMatchesHandValue) {
  const Tensor probs(Shape{2, 2, 1, 1}, {0.25, 0.75, 0.5, 0.5});
  const std::vector<int> labels{1, 0};
  EXPECT_NEAR(Model::mean_loss(probs, labels), -(std::log(0.75) + std::log(0.5)) / 2.0, 1e-15);
}

}  // namespace
}  // namespace tinykws
