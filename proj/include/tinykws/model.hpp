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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tinykws/condenser.hpp"
#include "tinykws/config.hpp"
#include "tinykws/ops.hpp"
#include "tinykws/quantize.hpp"
#include "tinykws/tensor.hpp"

namespace tinykws {

struct ConvLayer {
  ConvParams conv;
  std::optional<BatchNormParams> bn;
  Activation activation = Activation::kRelu;
};
struct CondenserLayer {
  AttentionCondenser condenser;
};
struct GlobalAvgPoolLayer {};
struct DenseLayer {
  DenseParams dense;
};
struct SoftmaxLayer {};

using Layer = std::variant<ConvLayer, CondenserLayer, GlobalAvgPoolLayer, DenseLayer, SoftmaxLayer>;

template <typename T>
struct NamedTensor {
  std::string name;
  T* tensor;
};

using ParamRef = NamedTensor<Tensor>;
using ConstParamRef = NamedTensor<const Tensor>;

struct ConvCache {
  Tensor input;
  BatchNormCache bn;
  Tensor pre_activation;
};
struct GlobalAvgPoolCache {
  Shape input_shape;
};
struct DenseCache {
  Tensor input;
};
struct SoftmaxCache {};

using LayerCache =
    std::variant<ConvCache, CondenserCache, GlobalAvgPoolCache, DenseCache, SoftmaxCache>;

struct ForwardPass {
  Tensor probs;  // (N, n_classes, 1, 1)
  std::vector<LayerCache> caches;  // empty unless run in train mode
};

// Aligned with Model::parameters() order.
using Gradients = std::vector<Tensor>;

enum class Precision { kF64, kF32 };

class Model {
 public:
  // Deterministic He-normal initialization from seed; biases and BN shifts
  // start at 0, BN scales at 1 and condenser scales at S = 0.5.
  static Model build(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  // Learnable tensors in a fixed order ("layers.<i>.<part>.<field>").
  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
  // Batch-norm running statistics: serialized, never optimized.
  std::vector<ParamRef> buffers();
  std::vector<ConstParamRef> buffers() const;
  std::size_t parameter_count() const;

  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;

  // Train mode keeps every layer cache and updates batch-norm running
  // statistics; infer mode leaves the model untouched and caches nothing.
  ForwardPass forward(const Tensor& x, Mode mode);
  // Infer-mode probabilities. kF32 rounds parameters and every layer output
  // to binary32.
  Tensor predict(const Tensor& x, Precision precision = Precision::kF64) const;

  // Gradients of the mean cross-entropy over the batch.
  Gradients backward(const ForwardPass& pass, std::span<const int> labels) const;
  static double mean_loss(const Tensor& probs, std::span<const int> labels);

  // Integer codes for weights replaced by quantize_model, keyed by name.
  const std::map<std::string, QuantizedTensor>& quantized() const noexcept { return quantized_; }
  // Also records `bits` as the config's weight width.
  void set_quantized(std::map<std::string, QuantizedTensor> records, int bits);

 private:
  Model() = default;
  void check_input(const Tensor& x) const;

  ModelConfig config_;
  std::vector<Layer> layers_;
  std::map<std::string, QuantizedTensor> quantized_;
};

}  // namespace tinykws
