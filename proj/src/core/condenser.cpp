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

#include "tinykws/condenser.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tinykws/error.hpp"

namespace tinykws {

double AttentionCondenser::scale() const { return sigmoid(scale_logit[0]); }

void AttentionCondenser::set_scale(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("condenser: scale must lie in [0, 1]");
  if (s == 0.0) {
    scale_logit[0] = -std::numeric_limits<double>::infinity();
  } else if (s == 1.0) {
    scale_logit[0] = std::numeric_limits<double>::infinity();
  } else {
    scale_logit[0] = std::log(s / (1.0 - s));
  }
}

void AttentionCondenser::validate() const {
  embed1.validate();
  embed2.validate();
  if (embed2.kernel() != Window2{1, 1} || embed2.groups != 1) {
    throw InvalidArgument("condenser: second embedding layer must be a 1x1 pointwise conv");
  }
  if (embed2.in_channels() != embed1.out_channels()) {
    throw ShapeError("condenser: embedding layers do not chain (" +
                     std::to_string(embed1.out_channels()) + " vs " +
                     std::to_string(embed2.in_channels()) + ")");
  }
  if (embed2.out_channels() != embed1.in_channels()) {
    throw ShapeError("condenser: second embedding layer must restore the " +
                     std::to_string(embed1.in_channels()) + " input channels");
  }
  if (scale_logit.size() != 1) throw InvalidArgument("condenser: scale_logit must be a scalar");
}

std::size_t default_condenser_groups(std::size_t channels, std::size_t c1) {
  for (std::size_t g = 4; g > 1; --g) {
    if (channels % g == 0 && c1 % g == 0) return g;
  }
  return 1;
}

AttentionCondenser make_condenser(std::size_t channels, std::size_t c1, std::size_t groups,
                                  Window2 kernel, Window2 pool_window, Window2 pool_stride) {
  if (groups == 0 || channels % groups != 0 || c1 % groups != 0) {
    throw InvalidArgument("condenser: groups " + std::to_string(groups) + " must divide both " +
                          std::to_string(channels) + " and " + std::to_string(c1));
  }
  AttentionCondenser p;
  p.pool_window = pool_window;
  p.pool_stride = pool_stride;
  p.embed1.weights = Tensor(Shape{c1, channels / groups, kernel.h, kernel.w});
  p.embed1.bias = Tensor(Shape{c1, 1, 1, 1});
  p.embed1.groups = groups;
  p.embed1.padding = Padding::kSame;
  p.embed2.weights = Tensor(Shape{channels, c1, 1, 1});
  p.embed2.bias = Tensor(Shape{channels, 1, 1, 1});
  return p;
}

Tensor selective_attention(const Tensor& v, const Tensor& a, double s) {
  if (v.shape() != a.shape()) {
    throw ShapeError("selective_attention: V " + v.shape().str() + " and A " + a.shape().str() +
                     " differ");
  }
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("selective_attention: S outside [0, 1]");
  Tensor out(v.shape());
  const double rest = 1.0 - s;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = a[i] * (s * v[i] + rest);
  return out;
}

Tensor condenser_forward(const Tensor& v, const AttentionCondenser& p, CondenserCache* cache) {
  p.validate();
  if (v.shape().c != p.channels()) {
    throw ShapeError("condenser: input has " + std::to_string(v.shape().c) +
                     " channels, condenser expects " + std::to_string(p.channels()));
  }
  if (v.shape().h < p.pool_window.h || v.shape().w < p.pool_window.w) {
    throw ShapeError("condenser: pooling " + std::to_string(p.pool_window.h) + "x" +
                     std::to_string(p.pool_window.w) + " leaves no pooled output for " +
                     v.shape().str());
  }
  PoolRecord pool = maxpool2d(v, p.pool_window, p.pool_stride);
  Tensor hidden_pre = conv2d(pool.pooled, p.embed1);
  Tensor hidden = relu(hidden_pre);
  const Tensor embedding = conv2d(hidden, p.embed2);
  const Tensor expanded =
      p.expansion == Expansion::kReplicate
          ? unpool_replicate(embedding, p.pool_window, p.pool_stride, {v.shape().h, v.shape().w})
          : unpool_switch(embedding, pool);
  Tensor attention = sigmoid(expanded);
  const double s = p.scale();
  Tensor out = selective_attention(v, attention, s);
  if (cache != nullptr) {
    cache->input = v;
    cache->pool = std::move(pool);
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
    cache->attention = std::move(attention);
    cache->scale = s;
    cache->valid = true;
  }
  return out;
}

CondenserGrads condenser_backward(const CondenserCache& cache, const AttentionCondenser& p,
                                  const Tensor& grad_out) {
  if (!cache.valid) throw InvalidArgument("condenser_backward: missing forward cache");
  const Tensor& v = cache.input;
  const Tensor& a = cache.attention;
  if (grad_out.shape() != v.shape()) {
    throw ShapeError("condenser_backward: grad_out shape " + grad_out.shape().str() +
                     " does not match output " + v.shape().str());
  }
  const double s = cache.scale;
  CondenserGrads g;
  g.input = Tensor(v.shape());
  Tensor grad_a(v.shape());
  double grad_s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.input[i] = grad_out[i] * a[i] * s;
    grad_a[i] = grad_out[i] * (s * v[i] + (1.0 - s));
    grad_s += grad_out[i] * a[i] * (v[i] - 1.0);
  }
  g.scale_logit = grad_s * s * (1.0 - s);

  const Tensor grad_expanded = sigmoid_backward(a, grad_a);
  const Shape& ps = cache.pool.pooled.shape();
  const Tensor grad_embedding =
      p.expansion == Expansion::kReplicate
          ? unpool_replicate_backward(grad_expanded, p.pool_window, p.pool_stride, {ps.h, ps.w})
          : unpool_switch_backward(grad_expanded, cache.pool);
  g.embed2 = conv2d_backward(cache.hidden, p.embed2, grad_embedding);
  const Tensor grad_hidden_pre = relu_backward(cache.hidden_pre, g.embed2.input);
  g.embed1 = conv2d_backward(cache.pool.pooled, p.embed1, grad_hidden_pre);
  const Tensor grad_pool = maxpool2d_backward(cache.pool, g.embed1.input);
  for (std::size_t i = 0; i < v.size(); ++i) g.input[i] += grad_pool[i];
  return g;
}

}  // namespace tinykws
