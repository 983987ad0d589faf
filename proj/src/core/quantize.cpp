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

#include "tinykws/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tinykws/complexity.hpp"
#include "tinykws/error.hpp"
#include "tinykws/model.hpp"

namespace tinykws {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

QuantizedTensor quantize_tensor(const Tensor& t, int bits, std::optional<QuantRange> range) {
  if (bits != 4 && bits != 8) throw InvalidArgument("quantize: bits must be 4 or 8");
  if (!t.all_finite()) throw InvalidArgument("quantize: tensor contains non-finite values");
  QuantizedTensor qt;
  qt.bits = bits;
  qt.shape = t.shape();
  qt.zero_point = -(1 << (bits - 1));
  const int highest = (1 << (bits - 1)) - 1;
  const double levels = static_cast<double>((1 << bits) - 1);

  double lo = 0.0;
  double hi = 0.0;
  if (range) {
    lo = range->lo;
    hi = range->hi;
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
      throw InvalidArgument("quantize: declared range must be finite with lo <= hi");
    }
  } else if (!t.empty()) {
    const auto [mn, mx] = std::minmax_element(t.data().begin(), t.data().end());
    lo = *mn;
    hi = *mx;
  }
  qt.min = lo;
  qt.q.assign(t.size(), static_cast<std::int8_t>(qt.zero_point));
  if (hi == lo) {
    qt.scale = 1.0;
    return qt;
  }
  qt.scale = (hi - lo) / levels;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double code = std::round((t[i] - lo) / qt.scale) + qt.zero_point;
    qt.q[i] = static_cast<std::int8_t>(std::clamp(code, static_cast<double>(qt.zero_point),
                                                  static_cast<double>(highest)));
  }
  return qt;
}

Tensor dequantize(const QuantizedTensor& qt) {
  Tensor out(qt.shape);
  if (out.size() != qt.q.size()) throw ShapeError("dequantize: code count does not match shape");
  for (std::size_t i = 0; i < qt.q.size(); ++i) {
    out[i] = qt.scale * static_cast<double>(qt.q[i] - qt.zero_point) + qt.min;
  }
  return out;
}

bool is_quantizable_weight(const std::string& param_name) { return ends_with(param_name, ".weight"); }

QuantizationReport quantize_model(Model& model, int bits) {
  if (bits != 4 && bits != 8 && bits != 32) {
    throw InvalidArgument("quantize_model: bits must be 4, 8 or 32");
  }
  QuantizationReport report;
  report.bits = bits;
  report.total_params = model.parameter_count();
  report.model_size_kbits = model_size_kbits(report.total_params, bits);
  if (bits == 32) return report;

  std::map<std::string, QuantizedTensor> records;
  for (auto& p : model.parameters()) {
    if (!is_quantizable_weight(p.name)) continue;
    QuantizedTensor qt = quantize_tensor(*p.tensor, bits);
    Tensor restored = dequantize(qt);
    report.max_abs_error = std::max(report.max_abs_error, max_abs_diff(*p.tensor, restored));
    *p.tensor = std::move(restored);
    report.quantized_tensors += 1;
    report.quantized_values += qt.q.size();
    records.emplace(p.name, std::move(qt));
  }
  model.set_quantized(std::move(records), bits);
  return report;
}

}  // namespace tinykws
