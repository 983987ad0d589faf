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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tinykws/config.hpp"

namespace tinykws {

// Counting conventions: one multiply-accumulate is one mult-add; bias adds,
// activations and pooling are free; batch norm is folded to one mult-add per
// output element; selective attention costs two per element.
struct LayerCost {
  std::string name;
  std::size_t params = 0;
  std::uint64_t mult_adds = 0;
};

struct ComplexityReport {
  std::vector<LayerCost> layers;
  std::size_t total_params = 0;
  std::uint64_t total_mult_adds = 0;
  int weight_bits = 32;
  double model_size_kbits = 0.0;
  Shape input_shape;
};

std::size_t conv_param_count(std::size_t c_in, std::size_t c_out, std::size_t groups,
                             Window2 kernel);
std::uint64_t conv_mult_adds(const Shape& out, std::size_t c_in, std::size_t groups,
                             Window2 kernel);

// Batch-norm rows count gamma and beta only; running statistics are excluded.
std::vector<LayerCost> count_params(const ModelConfig& config);
std::vector<LayerCost> count_mult_adds(const ModelConfig& config, const Shape& input_shape);

// Decimal kilobits: params * bits / 1000. bits in {4, 8, 16, 32}.
double model_size_kbits(std::size_t params, int bits);

// Rows from both counters, totals, and the size at `bits` (defaults to the
// config's weight_bits).
ComplexityReport analyze(const ModelConfig& config, std::optional<Shape> input_shape = std::nullopt,
                         std::optional<int> bits = std::nullopt);

struct ConstraintSpec {
  double min_val_accuracy = 0.90;
  std::size_t max_params = 15000;  // exclusive
  int required_weight_bits = 8;
  bool micro_ops_only = false;
};

struct ConstraintCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ConstraintVerdict {
  bool pass = false;
  std::vector<ConstraintCheck> checks;
};

// Deployment indicator: 1 iff val_accuracy >= min, params < max, weights are
// stored at no more than the required width and, when requested, the config
// contains no batch normalization.
ConstraintVerdict check_constraints(const ComplexityReport& report, double val_accuracy,
                                    const ConstraintSpec& spec, const ModelConfig& config);

std::string report_to_json(const ComplexityReport& report,
                           const std::optional<ConstraintVerdict>& verdict = std::nullopt,
                           int indent = 2);
std::string report_table(const ComplexityReport& report,
                         const std::optional<ConstraintVerdict>& verdict = std::nullopt);

}  // namespace tinykws
