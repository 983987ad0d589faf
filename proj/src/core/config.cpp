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

#include "tinykws/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"

namespace tinykws {

using nlohmann::json;

std::string_view layer_type_name(const LayerSpec& spec) {
  struct Visitor {
    std::string_view operator()(const ConvSpec&) const { return "conv"; }
    std::string_view operator()(const CondenserSpec&) const { return "attention_condenser"; }
    std::string_view operator()(const GlobalAvgPoolSpec&) const { return "global_avg_pool"; }
    std::string_view operator()(const DenseSpec&) const { return "dense"; }
    std::string_view operator()(const SoftmaxSpec&) const { return "softmax"; }
  };
  return std::visit(Visitor{}, spec);
}

std::size_t resolved_groups(const CondenserSpec& spec, std::size_t channels) {
  return spec.groups == 0 ? default_condenser_groups(channels, spec.c1) : spec.groups;
}

std::vector<LayerShapes> infer_shapes(const ModelConfig& config) {
  return infer_shapes(config, config.input_shape);
}

std::vector<LayerShapes> infer_shapes(const ModelConfig& config, const Shape& input_shape) {
  const auto& layers = config.layers;
  if (input_shape.c == 0 || input_shape.h == 0 || input_shape.w == 0 || input_shape.n == 0) {
    throw InvalidArgument("config: input_shape " + input_shape.str() + " has an empty dimension");
  }
  if (config.n_classes < 2) throw InvalidArgument("config: n_classes must be at least 2");
  if (config.weight_bits != 4 && config.weight_bits != 8 && config.weight_bits != 16 &&
      config.weight_bits != 32) {
    throw InvalidArgument("config: weight_bits must be one of 4, 8, 16, 32");
  }
  if (!config.labels.empty() && config.labels.size() != config.n_classes) {
    throw InvalidArgument("config: " + std::to_string(config.labels.size()) +
                          " labels given for " + std::to_string(config.n_classes) + " classes");
  }
  if (layers.size() < 2) throw InvalidArgument("config: needs at least dense and softmax layers");
  const std::size_t last = layers.size() - 1;
  const auto* tail_dense = std::get_if<DenseSpec>(&layers[last - 1]);
  if (tail_dense == nullptr || tail_dense->units != config.n_classes ||
      !std::holds_alternative<SoftmaxSpec>(layers[last])) {
    throw ConfigError(last - 1, "the last two layers must be dense(" +
                                    std::to_string(config.n_classes) + ") and softmax");
  }

  std::vector<LayerShapes> shapes;
  shapes.reserve(layers.size());
  Shape cur = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerShapes ls{cur, cur, {0, 0}};
    const LayerSpec& spec = layers[i];
    try {
      if (const auto* conv = std::get_if<ConvSpec>(&spec)) {
        if (conv->batch_norm && config.micro_ops_only) {
          throw ConfigError(i, "conv uses batch normalization, which micro_ops_only forbids");
        }
        if (conv->channels == 0) throw ConfigError(i, "conv needs a positive channel count");
        const std::size_t oh = conv_out_extent(cur.h, conv->kernel.h, conv->stride.h, conv->padding);
        const std::size_t ow = conv_out_extent(cur.w, conv->kernel.w, conv->stride.w, conv->padding);
        ls.out = Shape{cur.n, conv->channels, oh, ow};
      } else if (const auto* ac = std::get_if<CondenserSpec>(&spec)) {
        if (ac->c1 == 0) throw ConfigError(i, "attention_condenser needs a positive c1");
        if (ac->c2 != cur.c) {
          throw ConfigError(i, "attention_condenser c2=" + std::to_string(ac->c2) +
                                   " must equal its " + std::to_string(cur.c) + " input channels");
        }
        const std::size_t g = resolved_groups(*ac, cur.c);
        if (g == 0 || cur.c % g != 0 || ac->c1 % g != 0) {
          throw ConfigError(i, "attention_condenser groups=" + std::to_string(g) +
                                   " must divide c1 and the input channels");
        }
        if (ac->kernel.h == 0 || ac->kernel.w == 0) throw ConfigError(i, "empty embedding kernel");
        ls.condensed = {pool_out_extent(cur.h, ac->pool.h, ac->stride().h),
                        pool_out_extent(cur.w, ac->pool.w, ac->stride().w)};
      } else if (std::holds_alternative<GlobalAvgPoolSpec>(spec)) {
        ls.out = Shape{cur.n, cur.c, 1, 1};
      } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        if (d->units == 0) throw ConfigError(i, "dense needs a positive unit count");
        ls.out = Shape{cur.n, d->units, 1, 1};
      } else if (std::holds_alternative<SoftmaxSpec>(spec)) {
        if (i != last) throw ConfigError(i, "softmax may only appear as the final layer");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(i, std::string(layer_type_name(spec)) + ": " + e.what());
    }
    shapes.push_back(ls);
    cur = ls.out;
  }
  return shapes;
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw InvalidArgument("config " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) schema_error(where, "unknown key \"" + key + "\"");
  }
}

std::size_t get_count(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema_error(where, std::string("\"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

Window2 get_pair(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (v.is_number_integer() && v.get<long long>() > 0) {
    const auto k = v.get<std::size_t>();
    return {k, k};
  }
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer() ||
      v[0].get<long long>() <= 0 || v[1].get<long long>() <= 0) {
    schema_error(where, std::string("\"") + key + "\" must be a positive int or [h, w]");
  }
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

bool get_bool(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) schema_error(where, std::string("\"") + key + "\" must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) schema_error(where, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

LayerSpec layer_from_value(const json& v, std::size_t index) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (!v.is_object() || !v.contains("type")) schema_error(where, "missing \"type\"");
  const std::string type = get_string(v, "type", where);
  if (type == "conv") {
    reject_unknown(v, {"type", "channels", "kernel", "stride", "padding", "activation", "batch_norm"},
                   where);
    ConvSpec s;
    if (!v.contains("channels")) schema_error(where, "conv requires \"channels\"");
    s.channels = get_count(v, "channels", where);
    if (v.contains("kernel")) s.kernel = get_pair(v, "kernel", where);
    if (v.contains("stride")) s.stride = get_pair(v, "stride", where);
    if (v.contains("padding")) {
      const std::string pad = get_string(v, "padding", where);
      if (pad == "same") {
        s.padding = Padding::kSame;
      } else if (pad == "valid") {
        s.padding = Padding::kValid;
      } else {
        schema_error(where, "padding must be \"same\" or \"valid\"");
      }
    }
    if (v.contains("activation")) {
      const std::string act = get_string(v, "activation", where);
      if (act == "relu") {
        s.activation = Activation::kRelu;
      } else if (act == "none") {
        s.activation = Activation::kNone;
      } else {
        schema_error(where, "activation must be \"relu\" or \"none\"");
      }
    }
    if (v.contains("batch_norm")) s.batch_norm = get_bool(v, "batch_norm", where);
    return s;
  }
  if (type == "attention_condenser") {
    reject_unknown(v, {"type", "c1", "c2", "pool", "pool_stride", "groups", "kernel", "expansion"},
                   where);
    CondenserSpec s;
    if (!v.contains("c1") || !v.contains("c2")) {
      schema_error(where, "attention_condenser requires \"c1\" and \"c2\"");
    }
    s.c1 = get_count(v, "c1", where);
    s.c2 = get_count(v, "c2", where);
    if (v.contains("pool")) s.pool = get_pair(v, "pool", where);
    if (v.contains("pool_stride")) s.pool_stride = get_pair(v, "pool_stride", where);
    if (v.contains("groups")) s.groups = get_count(v, "groups", where);
    if (v.contains("kernel")) s.kernel = get_pair(v, "kernel", where);
    if (v.contains("expansion")) {
      const std::string e = get_string(v, "expansion", where);
      if (e == "replicate") {
        s.expansion = Expansion::kReplicate;
      } else if (e == "switch") {
        s.expansion = Expansion::kSwitch;
      } else {
        schema_error(where, "expansion must be \"replicate\" or \"switch\"");
      }
    }
    return s;
  }
  if (type == "global_avg_pool") {
    reject_unknown(v, {"type"}, where);
    return GlobalAvgPoolSpec{};
  }
  if (type == "dense") {
    reject_unknown(v, {"type", "units"}, where);
    if (!v.contains("units")) schema_error(where, "dense requires \"units\"");
    return DenseSpec{get_count(v, "units", where)};
  }
  if (type == "softmax") {
    reject_unknown(v, {"type"}, where);
    return SoftmaxSpec{};
  }
  schema_error(where, "unknown layer type \"" + type + "\"");
}

json pair_value(Window2 w) { return json::array({w.h, w.w}); }

json layer_to_value(const LayerSpec& spec) {
  json v;
  v["type"] = std::string(layer_type_name(spec));
  if (const auto* c = std::get_if<ConvSpec>(&spec)) {
    v["channels"] = c->channels;
    v["kernel"] = pair_value(c->kernel);
    v["stride"] = pair_value(c->stride);
    v["padding"] = c->padding == Padding::kSame ? "same" : "valid";
    v["activation"] = c->activation == Activation::kRelu ? "relu" : "none";
    v["batch_norm"] = c->batch_norm;
  } else if (const auto* a = std::get_if<CondenserSpec>(&spec)) {
    v["c1"] = a->c1;
    v["c2"] = a->c2;
    v["pool"] = pair_value(a->pool);
    v["pool_stride"] = pair_value(a->stride());
    v["groups"] = a->groups;
    v["kernel"] = pair_value(a->kernel);
    v["expansion"] = a->expansion == Expansion::kReplicate ? "replicate" : "switch";
  } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
    v["units"] = d->units;
  }
  return v;
}

}  // namespace

namespace detail {

ModelConfig config_from_value(const json& v) {
  reject_unknown(v, {"name", "input_shape", "n_classes", "micro_ops_only", "weight_bits", "layers",
                     "labels"},
                 "root");
  ModelConfig cfg;
  if (v.contains("name")) cfg.name = get_string(v, "name", "root");
  if (v.contains("input_shape")) {
    const json& s = v.at("input_shape");
    if (!s.is_array() || s.size() != 4) schema_error("root", "\"input_shape\" must be [N,C,H,W]");
    for (const auto& d : s) {
      if (!d.is_number_integer() || d.get<long long>() <= 0) {
        schema_error("root", "\"input_shape\" entries must be positive integers");
      }
    }
    cfg.input_shape = Shape{s[0].get<std::size_t>(), s[1].get<std::size_t>(),
                            s[2].get<std::size_t>(), s[3].get<std::size_t>()};
  }
  if (!v.contains("n_classes")) schema_error("root", "missing \"n_classes\"");
  cfg.n_classes = get_count(v, "n_classes", "root");
  if (v.contains("micro_ops_only")) cfg.micro_ops_only = get_bool(v, "micro_ops_only", "root");
  if (v.contains("weight_bits")) cfg.weight_bits = static_cast<int>(get_count(v, "weight_bits", "root"));
  if (v.contains("labels")) {
    const json& l = v.at("labels");
    if (!l.is_array()) schema_error("root", "\"labels\" must be an array of strings");
    for (const auto& s : l) {
      if (!s.is_string()) schema_error("root", "\"labels\" must be an array of strings");
      cfg.labels.push_back(s.get<std::string>());
    }
  }
  if (!v.contains("layers") || !v.at("layers").is_array()) {
    schema_error("root", "missing \"layers\" array");
  }
  const json& layers = v.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) cfg.layers.push_back(layer_from_value(layers[i], i));
  return cfg;
}

json config_to_value(const ModelConfig& cfg) {
  json v;
  v["name"] = cfg.name;
  v["input_shape"] = json::array({cfg.input_shape.n, cfg.input_shape.c, cfg.input_shape.h,
                                  cfg.input_shape.w});
  v["n_classes"] = cfg.n_classes;
  v["micro_ops_only"] = cfg.micro_ops_only;
  v["weight_bits"] = cfg.weight_bits;
  v["labels"] = cfg.labels;
  json layers = json::array();
  for (const auto& l : cfg.layers) layers.push_back(layer_to_value(l));
  v["layers"] = std::move(layers);
  return v;
}

}  // namespace detail

ModelConfig parse_config(std::string_view json_text) {
  json v;
  try {
    v = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  ModelConfig cfg = detail::config_from_value(v);
  infer_shapes(cfg);
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ModelConfig& config, int indent) {
  return detail::config_to_value(config).dump(indent);
}

}  // namespace tinykws
