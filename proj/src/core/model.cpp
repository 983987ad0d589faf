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

#include "tinykws/model.hpp"

#include <cmath>
#include <string>

#include "tinykws/error.hpp"
#include "tinykws/rng.hpp"

namespace tinykws {

namespace {

Tensor ones(std::size_t c) { return Tensor(Shape{c, 1, 1, 1}, 1.0); }
Tensor zeros(std::size_t c) { return Tensor(Shape{c, 1, 1, 1}, 0.0); }

std::string prefix(std::size_t i) { return "layers." + std::to_string(i) + "."; }

// Calls f(name, tensor) for every learnable tensor of layer i, in registry order.
template <typename LayerT, typename F>
void visit_layer_params(LayerT& layer, std::size_t i, F&& f) {
  const std::string p = prefix(i);
  if (auto* c = std::get_if<ConvLayer>(&layer)) {
    f(p + "conv.weight", c->conv.weights);
    f(p + "conv.bias", c->conv.bias);
    if (c->bn) {
      f(p + "bn.gamma", c->bn->gamma);
      f(p + "bn.beta", c->bn->beta);
    }
  } else if (auto* a = std::get_if<CondenserLayer>(&layer)) {
    f(p + "condenser.embed1.weight", a->condenser.embed1.weights);
    f(p + "condenser.embed1.bias", a->condenser.embed1.bias);
    f(p + "condenser.embed2.weight", a->condenser.embed2.weights);
    f(p + "condenser.embed2.bias", a->condenser.embed2.bias);
    f(p + "condenser.scale_logit", a->condenser.scale_logit);
  } else if (auto* d = std::get_if<DenseLayer>(&layer)) {
    f(p + "dense.weight", d->dense.weights);
    f(p + "dense.bias", d->dense.bias);
  }
}

template <typename LayerT, typename F>
void visit_layer_buffers(LayerT& layer, std::size_t i, F&& f) {
  if (auto* c = std::get_if<ConvLayer>(&layer); c != nullptr && c->bn) {
    f(prefix(i) + "bn.running_mean", c->bn->running_mean);
    f(prefix(i) + "bn.running_var", c->bn->running_var);
  }
}

void round_to_f32(Tensor& t) {
  for (double& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

Tensor infer_layer(const Layer& layer, const Tensor& x) {
  if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    Tensor y = conv2d(x, c->conv);
    if (c->bn) y = batchnorm_infer(y, *c->bn);
    return c->activation == Activation::kRelu ? relu(y) : y;
  }
  if (const auto* a = std::get_if<CondenserLayer>(&layer)) return condenser_forward(x, a->condenser);
  if (std::holds_alternative<GlobalAvgPoolLayer>(layer)) return global_avg_pool(x);
  if (const auto* d = std::get_if<DenseLayer>(&layer)) return dense(x, d->dense);
  return softmax(x);
}

}  // namespace

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  const auto shapes = infer_shapes(config);
  Model m;
  m.config_ = config;
  Rng rng(seed);
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const LayerSpec& spec = config.layers[i];
    const Shape& in = shapes[i].in;
    if (const auto* c = std::get_if<ConvSpec>(&spec)) {
      ConvLayer layer;
      layer.conv.weights = Tensor::he_normal(Shape{c->channels, in.c, c->kernel.h, c->kernel.w},
                                             in.c * c->kernel.h * c->kernel.w, rng);
      layer.conv.bias = zeros(c->channels);
      layer.conv.stride = c->stride;
      layer.conv.padding = c->padding;
      if (c->batch_norm) {
        BatchNormParams bn;
        bn.gamma = ones(c->channels);
        bn.beta = zeros(c->channels);
        bn.running_mean = zeros(c->channels);
        bn.running_var = ones(c->channels);
        layer.bn = std::move(bn);
      }
      layer.activation = c->activation;
      m.layers_.emplace_back(std::move(layer));
    } else if (const auto* a = std::get_if<CondenserSpec>(&spec)) {
      const std::size_t g = resolved_groups(*a, in.c);
      AttentionCondenser cond = make_condenser(in.c, a->c1, g, a->kernel, a->pool, a->stride());
      cond.expansion = a->expansion;
      cond.embed1.weights = Tensor::he_normal(cond.embed1.weights.shape(),
                                              (in.c / g) * a->kernel.h * a->kernel.w, rng);
      cond.embed2.weights = Tensor::he_normal(cond.embed2.weights.shape(), a->c1, rng);
      m.layers_.emplace_back(CondenserLayer{std::move(cond)});
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(spec)) {
      m.layers_.emplace_back(GlobalAvgPoolLayer{});
    } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      const std::size_t fan_in = in.c * in.h * in.w;
      DenseLayer layer;
      layer.dense.weights = Tensor::he_normal(Shape{d->units, fan_in, 1, 1}, fan_in, rng);
      layer.dense.bias = zeros(d->units);
      m.layers_.emplace_back(std::move(layer));
    } else {
      m.layers_.emplace_back(SoftmaxLayer{});
    }
  }
  return m;
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    visit_layer_params(layers_[i], i, [&](std::string name, Tensor& t) {
      out.push_back({std::move(name), &t});
    });
  }
  return out;
}

std::vector<ConstParamRef> Model::parameters() const {
  std::vector<ConstParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    visit_layer_params(layers_[i], i, [&](std::string name, const Tensor& t) {
      out.push_back({std::move(name), &t});
    });
  }
  return out;
}

std::vector<ParamRef> Model::buffers() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    visit_layer_buffers(layers_[i], i, [&](std::string name, Tensor& t) {
      out.push_back({std::move(name), &t});
    });
  }
  return out;
}

std::vector<ConstParamRef> Model::buffers() const {
  std::vector<ConstParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    visit_layer_buffers(layers_[i], i, [&](std::string name, const Tensor& t) {
      out.push_back({std::move(name), &t});
    });
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor->size();
  return total;
}

Tensor* Model::find(const std::string& name) {
  for (auto& p : parameters()) {
    if (p.name == name) return p.tensor;
  }
  for (auto& b : buffers()) {
    if (b.name == name) return b.tensor;
  }
  return nullptr;
}

const Tensor* Model::find(const std::string& name) const {
  return const_cast<Model*>(this)->find(name);
}

void Model::check_input(const Tensor& x) const {
  const Shape& s = x.shape();
  const Shape& want = config_.input_shape;
  if (s.n == 0 || s.c != want.c || s.h != want.h || s.w != want.w) {
    throw ShapeError("model input " + s.str() + " does not match configured input (N," +
                     std::to_string(want.c) + "," + std::to_string(want.h) + "," +
                     std::to_string(want.w) + ")");
  }
}

ForwardPass Model::forward(const Tensor& x, Mode mode) {
  check_input(x);
  ForwardPass pass;
  if (mode == Mode::kInfer) {
    pass.probs = predict(x);
    return pass;
  }
  pass.caches.reserve(layers_.size());
  Tensor cur = x;
  for (auto& layer : layers_) {
    if (auto* c = std::get_if<ConvLayer>(&layer)) {
      ConvCache cache;
      cache.input = cur;
      Tensor y = conv2d(cur, c->conv);
      if (c->bn) y = batchnorm(y, *c->bn, Mode::kTrain, &cache.bn);
      if (c->activation == Activation::kRelu) {
        cur = relu(y);
        cache.pre_activation = std::move(y);
      } else {
        cur = std::move(y);
      }
      pass.caches.emplace_back(std::move(cache));
    } else if (auto* a = std::get_if<CondenserLayer>(&layer)) {
      CondenserCache cache;
      cur = condenser_forward(cur, a->condenser, &cache);
      pass.caches.emplace_back(std::move(cache));
    } else if (std::holds_alternative<GlobalAvgPoolLayer>(layer)) {
      pass.caches.emplace_back(GlobalAvgPoolCache{cur.shape()});
      cur = global_avg_pool(cur);
    } else if (auto* d = std::get_if<DenseLayer>(&layer)) {
      pass.caches.emplace_back(DenseCache{cur});
      cur = dense(cur, d->dense);
    } else {
      pass.caches.emplace_back(SoftmaxCache{});
      cur = softmax(cur);
    }
  }
  pass.probs = std::move(cur);
  return pass;
}

Tensor Model::predict(const Tensor& x, Precision precision) const {
  check_input(x);
  if (precision == Precision::kF64) {
    Tensor cur = x;
    for (const auto& layer : layers_) cur = infer_layer(layer, cur);
    return cur;
  }
  Model rounded = *this;
  for (auto& p : rounded.parameters()) round_to_f32(*p.tensor);
  for (auto& b : rounded.buffers()) round_to_f32(*b.tensor);
  Tensor cur = x;
  round_to_f32(cur);
  for (const auto& layer : rounded.layers_) {
    cur = infer_layer(layer, cur);
    round_to_f32(cur);
  }
  return cur;
}

Gradients Model::backward(const ForwardPass& pass, std::span<const int> labels) const {
  if (pass.caches.size() != layers_.size()) {
    throw InvalidArgument("backward: forward pass carries no train-mode caches");
  }
  std::vector<std::vector<Tensor>> per_layer(layers_.size());
  Tensor grad = softmax_cross_entropy_backward(pass.probs, labels);
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& layer = layers_[k];
    const LayerCache& cache = pass.caches[k];
    if (std::holds_alternative<SoftmaxLayer>(layer)) {
      // The combined softmax/cross-entropy gradient is already w.r.t. the logits.
      continue;
    }
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const auto& c = std::get<DenseCache>(cache);
      DenseGrads g = dense_backward(c.input, d->dense, grad);
      per_layer[k] = {std::move(g.weights), std::move(g.bias)};
      grad = std::move(g.input);
    } else if (std::holds_alternative<GlobalAvgPoolLayer>(layer)) {
      grad = global_avg_pool_backward(std::get<GlobalAvgPoolCache>(cache).input_shape, grad);
    } else if (const auto* a = std::get_if<CondenserLayer>(&layer)) {
      CondenserGrads g = condenser_backward(std::get<CondenserCache>(cache), a->condenser, grad);
      per_layer[k] = {std::move(g.embed1.weights), std::move(g.embed1.bias),
                      std::move(g.embed2.weights), std::move(g.embed2.bias),
                      Tensor(Shape{1, 1, 1, 1}, g.scale_logit)};
      grad = std::move(g.input);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      const auto& cc = std::get<ConvCache>(cache);
      if (c->activation == Activation::kRelu) grad = relu_backward(cc.pre_activation, grad);
      Tensor grad_gamma, grad_beta;
      if (c->bn) {
        BatchNormGrads bg = batchnorm_backward(cc.bn, *c->bn, grad);
        grad = std::move(bg.input);
        grad_gamma = std::move(bg.gamma);
        grad_beta = std::move(bg.beta);
      }
      ConvGrads g = conv2d_backward(cc.input, c->conv, grad);
      per_layer[k] = {std::move(g.weights), std::move(g.bias)};
      if (c->bn) {
        per_layer[k].push_back(std::move(grad_gamma));
        per_layer[k].push_back(std::move(grad_beta));
      }
      grad = std::move(g.input);
    }
  }
  Gradients out;
  for (auto& layer_grads : per_layer) {
    for (auto& g : layer_grads) out.push_back(std::move(g));
  }
  return out;
}

double Model::mean_loss(const Tensor& probs, std::span<const int> labels) {
  const Shape& s = probs.shape();
  const std::size_t k = s.c * s.h * s.w;
  if (labels.size() != s.n) throw ShapeError("mean_loss: label count != batch size");
  double total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    if (labels[n] < 0) throw InvalidArgument("mean_loss: negative label");
    total += cross_entropy(probs.data().subspan(n * k, k), static_cast<std::size_t>(labels[n]));
  }
  return total / static_cast<double>(s.n);
}

void Model::set_quantized(std::map<std::string, QuantizedTensor> records, int bits) {
  quantized_ = std::move(records);
  config_.weight_bits = bits;
}

}  // namespace tinykws
