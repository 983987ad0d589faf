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
#include <optional>
#include <string>
#include <vector>

#include "tinykws/tensor.hpp"

namespace tinykws {

class Model;

// Per-tensor affine quantization anchored at the tensor minimum:
//   scale = (max - min) / (2^bits - 1)
//   q     = clamp(round((x - min) / scale) + zero_point)
//   x'    = scale * (q - zero_point) + min
// zero_point is the lowest signed code, -2^(bits-1), so min maps onto it.
struct QuantizedTensor {
  std::vector<std::int8_t> q;
  double scale = 1.0;
  double min = 0.0;
  int zero_point = -128;
  int bits = 8;
  Shape shape;
};

struct QuantRange {
  double lo;
  double hi;
};

// bits in {4, 8}. With no range the tensor's own [min, max] is used. An
// all-equal tensor gets scale 1 and every code at zero_point, which
// dequantizes exactly.
QuantizedTensor quantize_tensor(const Tensor& t, int bits,
                                std::optional<QuantRange> range = std::nullopt);
Tensor dequantize(const QuantizedTensor& qt);

struct QuantizationReport {
  int bits = 32;
  std::size_t quantized_tensors = 0;
  std::size_t quantized_values = 0;
  std::size_t total_params = 0;
  double model_size_kbits = 0.0;
  // Largest |w - w'| over all quantized weights.
  double max_abs_error = 0.0;
};

// Passes every weight tensor (conv, embedding and dense weights) through
// quantize/dequantize and records the codes for serialization. Biases, batch
// norm affine terms and condenser scales stay full precision. bits == 32 is a
// pass-through. The size report counts every parameter at `bits`.
QuantizationReport quantize_model(Model& model, int bits);

// True for registry entries that quantize_model stores as integer codes.
bool is_quantizable_weight(const std::string& param_name);

}  // namespace tinykws
