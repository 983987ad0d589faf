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

#include "tinykws/complexity.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "tinykws/error.hpp"

namespace tinykws {

namespace {

std::string row_name(std::size_t i, const char* part) {
  return "layers." + std::to_string(i) + "." + part;
}

std::vector<LayerCost> layer_costs(const ModelConfig& config, const Shape& input_shape) {
  const auto shapes = infer_shapes(config, input_shape);
  std::vector<LayerCost> rows;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const LayerSpec& spec = config.layers[i];
    const Shape& in = shapes[i].in;
    const Shape& out = shapes[i].out;
    if (const auto* c = std::get_if<ConvSpec>(&spec)) {
      rows.push_back({row_name(i, "conv"), conv_param_count(in.c, c->channels, 1, c->kernel),
                      conv_mult_adds(out, in.c, 1, c->kernel)});
      if (c->batch_norm) rows.push_back({row_name(i, "bn"), 2 * c->channels, out.numel()});
    } else if (const auto* a = std::get_if<CondenserSpec>(&spec)) {
      const std::size_t g = resolved_groups(*a, in.c);
      const Shape hidden{in.n, a->c1, shapes[i].condensed.h, shapes[i].condensed.w};
      const Shape embedded{in.n, in.c, hidden.h, hidden.w};
      const std::size_t params = conv_param_count(in.c, a->c1, g, a->kernel) +
                                 conv_param_count(a->c1, in.c, 1, {1, 1}) + 1;
      const std::uint64_t macs = conv_mult_adds(hidden, in.c, g, a->kernel) +
                                 conv_mult_adds(embedded, a->c1, 1, {1, 1}) + 2 * out.numel();
      rows.push_back({row_name(i, "attention_condenser"), params, macs});
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(spec)) {
      rows.push_back({row_name(i, "global_avg_pool"), 0, 0});
    } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      const std::size_t fan_in = in.c * in.h * in.w;
      rows.push_back({row_name(i, "dense"), fan_in * d->units + d->units,
                      static_cast<std::uint64_t>(in.n) * fan_in * d->units});
    } else {
      rows.push_back({row_name(i, "softmax"), 0, 0});
    }
  }
  return rows;
}

}  // namespace

std::size_t conv_param_count(std::size_t c_in, std::size_t c_out, std::size_t groups,
                             Window2 kernel) {
  return c_out * (c_in / groups) * kernel.h * kernel.w + c_out;
}

std::uint64_t conv_mult_adds(const Shape& out, std::size_t c_in, std::size_t groups,
                             Window2 kernel) {
  return static_cast<std::uint64_t>(out.numel()) * (c_in / groups) * kernel.h * kernel.w;
}

std::vector<LayerCost> count_params(const ModelConfig& config) {
  auto rows = layer_costs(config, config.input_shape);
  for (auto& r : rows) r.mult_adds = 0;
  return rows;
}

std::vector<LayerCost> count_mult_adds(const ModelConfig& config, const Shape& input_shape) {
  auto rows = layer_costs(config, input_shape);
  for (auto& r : rows) r.params = 0;
  return rows;
}

double model_size_kbits(std::size_t params, int bits) {
  if (bits != 4 && bits != 8 && bits != 16 && bits != 32) {
    throw InvalidArgument("model_size_kbits: unsupported bit width " + std::to_string(bits));
  }
  return static_cast<double>(params) * static_cast<double>(bits) / 1000.0;
}

ComplexityReport analyze(const ModelConfig& config, std::optional<Shape> input_shape,
                         std::optional<int> bits) {
  ComplexityReport r;
  r.input_shape = input_shape.value_or(config.input_shape);
  r.weight_bits = bits.value_or(config.weight_bits);
  r.layers = layer_costs(config, r.input_shape);
  for (const auto& row : r.layers) {
    r.total_params += row.params;
    r.total_mult_adds += row.mult_adds;
  }
  r.model_size_kbits = model_size_kbits(r.total_params, r.weight_bits);
  return r;
}

ConstraintVerdict check_constraints(const ComplexityReport& report, double val_accuracy,
                                    const ConstraintSpec& spec, const ModelConfig& config) {
  ConstraintVerdict v;
  auto add = [&](std::string name, bool ok, std::string detail) {
    v.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  std::ostringstream acc;
  acc << "validation accuracy " << val_accuracy << " >= " << spec.min_val_accuracy;
  add("val_accuracy", val_accuracy >= spec.min_val_accuracy, acc.str());
  add("params", report.total_params < spec.max_params,
      std::to_string(report.total_params) + " < " + std::to_string(spec.max_params));
  add("weight_bits", report.weight_bits <= spec.required_weight_bits,
      std::to_string(report.weight_bits) + "-bit weights, " +
          std::to_string(spec.required_weight_bits) + "-bit required");
  if (spec.micro_ops_only) {
    std::string offending;
    for (std::size_t i = 0; i < config.layers.size(); ++i) {
      const auto* c = std::get_if<ConvSpec>(&config.layers[i]);
      if (c != nullptr && c->batch_norm) {
        offending += (offending.empty() ? "" : ", ") + std::string("layer ") + std::to_string(i);
      }
    }
    add("micro_ops", offending.empty(),
        offending.empty() ? "no batch normalization" : "batch normalization in " + offending);
  }
  v.pass = true;
  for (const auto& c : v.checks) v.pass = v.pass && c.pass;
  return v;
}

std::string report_to_json(const ComplexityReport& report,
                           const std::optional<ConstraintVerdict>& verdict, int indent) {
  nlohmann::json j;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& row : report.layers) {
    layers.push_back({{"name", row.name}, {"params", row.params}, {"mult_adds", row.mult_adds}});
  }
  j["layers"] = std::move(layers);
  j["totals"] = {{"params", report.total_params}, {"mult_adds", report.total_mult_adds}};
  j["model_size_kbits"] = report.model_size_kbits;
  j["weight_bits"] = report.weight_bits;
  const Shape& s = report.input_shape;
  j["input_shape"] = {s.n, s.c, s.h, s.w};
  if (verdict) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : verdict->checks) {
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    j["constraints"] = {{"pass", verdict->pass}, {"checks", std::move(checks)}};
  }
  return j.dump(indent);
}

std::string report_table(const ComplexityReport& report,
                         const std::optional<ConstraintVerdict>& verdict) {
  std::ostringstream os;
  os << std::left << std::setw(34) << "layer" << std::right << std::setw(10) << "params"
     << std::setw(14) << "mult_adds" << "\n";
  os << std::string(58, '-') << "\n";
  for (const auto& row : report.layers) {
    os << std::left << std::setw(34) << row.name << std::right << std::setw(10) << row.params
       << std::setw(14) << row.mult_adds << "\n";
  }
  os << std::string(58, '-') << "\n";
  os << std::left << std::setw(34) << "total" << std::right << std::setw(10) << report.total_params
     << std::setw(14) << report.total_mult_adds << "\n";
  os << "model size: " << report.model_size_kbits << " kbits at " << report.weight_bits
     << "-bit weights\n";
  if (verdict) {
    for (const auto& c : verdict->checks) {
      os << (c.pass ? "  [pass] " : "  [FAIL] ") << c.name << ": " << c.detail << "\n";
    }
    os << "constraints: " << (verdict->pass ? "PASS" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace tinykws
