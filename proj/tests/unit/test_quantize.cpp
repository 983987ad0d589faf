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
#include "tinykws/quantize.hpp"

namespace tinykws {
namespace {

const std::string kConfigDir = std::string(TINYKWS_SOURCE_DIR) + "/configs/";

TEST(Quantize, RoundTripWithinHalfStep) {
  Rng rng(41);
  for (int t = 0; t < 100; ++t) {
    const double lo = rng.uniform(-5, 0), hi = lo + rng.uniform(0.01, 10);
    const Tensor x = testing::random_tensor(Shape{1, 1 + rng.below(4), 1 + rng.below(8), 8}, rng, lo, hi);
    const QuantizedTensor q = quantize_tensor(x, 8);
    const Tensor back = dequantize(q);
    ASSERT_EQ(back.shape(), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(back[i] - x[i]), q.scale / 2) << "tensor " << t << " element " << i;
    }
  }
}

TEST(Quantize, EndpointsAndCodeRange) {
  const Tensor x = matrix(1, 4, {-1.0, 0.0, 0.5, 3.0});
  const QuantizedTensor q = quantize_tensor(x, 8);
  EXPECT_EQ(q.zero_point, -128);
  EXPECT_DOUBLE_EQ(q.scale, 4.0 / 255.0);
  EXPECT_EQ(q.q.front(), -128);
  EXPECT_EQ(q.q.back(), 127);
  EXPECT_EQ(dequantize(q)[0], -1.0);
  const QuantizedTensor q4 = quantize_tensor(x, 4);
  EXPECT_EQ(q4.zero_point, -8);
  for (auto c : q4.q) {
    EXPECT_GE(c, -8);
    EXPECT_LE(c, 7);
  }
}

TEST(Quantize, DegenerateTensorIsExact) {
  const Tensor x = Tensor::constant(Shape{1, 1, 2, 3}, 0.7);
  const QuantizedTensor q = quantize_tensor(x, 8);
  EXPECT_EQ(q.scale, 1.0);
  for (auto c : q.q) EXPECT_EQ(c, q.zero_point);
  EXPECT_EQ(dequantize(q), x);
}

TEST(Quantize, DeclaredRangeClampsOutliers) {
  const Tensor x = matrix(1, 3, {-10.0, 0.0, 10.0});
  const QuantizedTensor q = quantize_tensor(x, 8, QuantRange{-1.0, 1.0});
  EXPECT_EQ(q.q[0], -128);
  EXPECT_EQ(q.q[2], 127);
  EXPECT_DOUBLE_EQ(dequantize(q)[2], 1.0);
  EXPECT_THROW(quantize_tensor(x, 8, QuantRange{1.0, -1.0}), InvalidArgument);
}

TEST(Quantize, ScaleEquivariance) {
  // Power-of-two factors keep the arithmetic exact.
  Rng rng(42);
  const Tensor x = testing::random_tensor(Shape{1, 2, 4, 4}, rng, -1, 2);
  const QuantizedTensor a = quantize_tensor(x, 8), b = quantize_tensor(scale(x, 4.0), 8);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(b.scale, 4.0 * a.scale);
}

TEST(Quantize, RejectsBadInputs) {
  Tensor x = matrix(1, 2, {0.0, 1.0});
  EXPECT_THROW(quantize_tensor(x, 16), InvalidArgument);
  x[0] = std::nan("");
  EXPECT_THROW(quantize_tensor(x, 8), InvalidArgument);
}

TEST(QuantizeModel, PreservesShapesAndRegistryAndSkipsNonWeights) {
  Model m = Model::build(load_config(kConfigDir + "tinyspeech-z.cfg"), 3);
  for (auto& p : m.parameters()) {
    if (!is_quantizable_weight(p.name)) p.tensor->fill(0.123456789);
  }
  const Model before = m;
  const QuantizationReport r = quantize_model(m, 8);
  const auto pa = before.parameters();
  const auto pb = m.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  std::size_t quantized = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_EQ(pa[i].tensor->shape(), pb[i].tensor->shape());
    if (is_quantizable_weight(pa[i].name)) {
      ++quantized;
      EXPECT_EQ(m.quantized().count(pa[i].name), 1u);
    } else {
      EXPECT_EQ(*pa[i].tensor, *pb[i].tensor) << pa[i].name;
    }
  }
  EXPECT_EQ(r.quantized_tensors, quantized);
  EXPECT_EQ(m.config().weight_bits, 8);
  EXPECT_EQ(r.total_params, m.parameter_count());
  EXPECT_EQ(r.model_size_kbits, static_cast<double>(m.parameter_count()) * 8 / 1000);
  EXPECT_GT(r.max_abs_error, 0.0);
}

TEST(QuantizeModel, ThirtyTwoBitsIsPassThrough) {
  Model m = Model::build(load_config(kConfigDir + "tinyspeech-z.cfg"), 3);
  const Model before = m;
  quantize_model(m, 32);
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(*m.parameters()[i].tensor, *before.parameters()[i].tensor);
  }
  EXPECT_TRUE(m.quantized().empty());
  EXPECT_THROW(quantize_model(m, 5), InvalidArgument);
}

TEST(QuantizeModel, PredictionsStayClose) {
  Model m = Model::build(load_config(kConfigDir + "tinyspeech-synth.cfg"), 4);
  Rng rng(5);
  const Tensor x = testing::random_tensor(Shape{2, 1, 98, 40}, rng);
  const Tensor p = m.predict(x);
  quantize_model(m, 8);
  EXPECT_LT(max_abs_diff(p, m.predict(x)), 0.05);
}

}  // namespace
}  // namespace tinykws
