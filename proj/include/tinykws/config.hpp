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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tinykws/condenser.hpp"
#include "tinykws/error.hpp"
#include "tinykws/ops.hpp"
#include "tinykws/tensor.hpp"

namespace tinykws {

enum class Activation { kNone, kRelu };

struct ConvSpec {
  std::size_t channels = 0;
  Window2 kernel{3, 3};
  Window2 stride{1, 1};
  Padding padding = Padding::kSame;
  Activation activation = Activation::kRelu;
  bool batch_norm = false;
};

// c2 must equal the incoming channel count so the attention map matches V.
// groups == 0 selects default_condenser_groups().
struct CondenserSpec {
  std::size_t c1 = 0;
  std::size_t c2 = 0;
  Window2 pool{2, 2};
  std::optional<Window2> pool_stride;  // defaults to the pool window
  std::size_t groups = 0;
  Window2 kernel{3, 3};
  Expansion expansion = Expansion::kReplicate;

  Window2 stride() const { return pool_stride.value_or(pool); }
};

struct GlobalAvgPoolSpec {};
struct DenseSpec {
  std::size_t units = 0;
};
struct SoftmaxSpec {};

using LayerSpec = std::variant<ConvSpec, CondenserSpec, GlobalAvgPoolSpec, DenseSpec, SoftmaxSpec>;

std::string_view layer_type_name(const LayerSpec& spec);

struct ModelConfig {
  std::string name;
  Shape input_shape{1, 1, 98, 40};
  std::size_t n_classes = 0;
  bool micro_ops_only = false;
  int weight_bits = 32;
  std::vector<LayerSpec> layers;
  std::vector<std::string> labels;  // optional class names, index = class id
};

// Validation failure tied to a specific layer (index into ModelConfig::layers).
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::size_t layer, const std::string& what)
      : InvalidArgument("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

struct LayerShapes {
  Shape in;
  Shape out;
  // Pooled extent inside an attention condenser (zero for other layers).
  Window2 condensed{0, 0};
};

// Checks every config invariant and returns per-layer shapes for
// input_shape. Throws ConfigError naming the offending layer.
std::vector<LayerShapes> infer_shapes(const ModelConfig& config);
std::vector<LayerShapes> infer_shapes(const ModelConfig& config, const Shape& input_shape);

// The condenser group count actually used for a spec with `channels` inputs.
std::size_t resolved_groups(const CondenserSpec& spec, std::size_t channels);

// JSON schema (unknown keys are rejected):
// {
//   "name": str, "input_shape": [N,C,H,W], "n_classes": int,
//   "micro_ops_only": bool, "weight_bits": 4|8|16|32, "labels": [str...],
//   "layers": [
//     {"type": "conv", "channels": int, "kernel": [kh,kw], "stride": [sh,sw],
//      "padding": "same"|"valid", "activation": "relu"|"none", "batch_norm": bool},
//     {"type": "attention_condenser", "c1": int, "c2": int, "pool": [ph,pw],
//      "pool_stride": [sh,sw], "groups": int, "kernel": [kh,kw],
//      "expansion": "replicate"|"switch"},
//     {"type": "global_avg_pool"}, {"type": "dense", "units": int}, {"type": "softmax"}
//   ]
// }
ModelConfig parse_config(std::string_view json_text);
ModelConfig load_config(const std::string& path);
// Canonical form: sorted keys, every optional field written out.
std::string config_to_json(const ModelConfig& config, int indent = -1);

}  // namespace tinykws
