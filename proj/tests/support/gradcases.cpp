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

#include "gradcases.hpp"

#include <cmath>

#include "tinykws/condenser.hpp"
#include "tinykws/ops.hpp"

namespace tinykws::testing {

namespace {

void add_case(std::vector<GradCase>& out, std::string name, const Tensor& analytic, Tensor& x,
              const std::function<double()>& loss) {
  out.push_back({std::move(name), compare_gradients(analytic, numeric_gradient(x, loss))});
}

// Keeps ReLU inputs clear of the kink by more than the FD step.
Tensor away_from_zero(Tensor t) {
  for (auto& v : t.data()) {
    if (std::abs(v) < 0.05) v = v < 0 ? v - 0.05 : v + 0.05;
  }
  return t;
}

void conv_cases(std::vector<GradCase>& out, Rng& rng, const std::string& tag, Shape xs,
                std::size_t cout, std::size_t groups, Window2 k, Window2 stride, Padding pad) {
  Tensor x = random_tensor(xs, rng);
  ConvParams p;
  p.weights = random_tensor(Shape{cout, xs.c / groups, k.h, k.w}, rng);
  p.bias = random_tensor(Shape{cout, 1, 1, 1}, rng);
  p.groups = groups;
  p.stride = stride;
  p.padding = pad;
  const Tensor r = random_like(conv2d(x, p), rng);
  const ConvGrads g = conv2d_backward(x, p, r);
  auto loss = [&] { return dot(r, conv2d(x, p)); };
  add_case(out, tag + "/input", g.input, x, loss);
  add_case(out, tag + "/weights", g.weights, p.weights, loss);
  add_case(out, tag + "/bias", g.bias, p.bias, loss);
}

}  // namespace

std::vector<GradCase> primitive_gradient_cases(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCase> out;

  conv_cases(out, rng, "conv2d_valid", Shape{2, 2, 5, 6}, 3, 1, {3, 3}, {1, 1}, Padding::kValid);
  conv_cases(out, rng, "conv2d_same_grouped_strided", Shape{1, 4, 7, 6}, 4, 2, {3, 2}, {2, 2},
             Padding::kSame);
  conv_cases(out, rng, "conv2d_pointwise", Shape{2, 3, 3, 3}, 2, 1, {1, 1}, {1, 1}, Padding::kValid);

  {
    Tensor x = random_tensor(Shape{2, 2, 5, 6}, rng);
    const PoolRecord rec = maxpool2d(x, {2, 2}, {2, 2});
    const Tensor r = random_like(rec.pooled, rng);
    add_case(out, "maxpool2d/input", maxpool2d_backward(rec, r), x,
             [&] { return dot(r, maxpool2d(x, {2, 2}, {2, 2}).pooled); });
  }
  {
    Tensor x = random_tensor(Shape{1, 2, 3, 4}, rng);
    const Window2 out_hw{7, 9};  // remainder rows and columns copy the last region
    const Tensor r = random_like(unpool_replicate(x, {2, 2}, {2, 2}, out_hw), rng);
    add_case(out, "unpool_replicate/input",
             unpool_replicate_backward(r, {2, 2}, {2, 2}, {3, 4}), x,
             [&] { return dot(r, unpool_replicate(x, {2, 2}, {2, 2}, out_hw)); });
  }
  {
    const Tensor v = random_tensor(Shape{1, 2, 4, 6}, rng);
    const PoolRecord rec = maxpool2d(v, {2, 2}, {2, 2});
    Tensor q = random_like(rec.pooled, rng);
    const Tensor r = random_like(v, rng);
    add_case(out, "unpool_switch/input", unpool_switch_backward(r, rec), q,
             [&] { return dot(r, unpool_switch(q, rec)); });
  }
  {
    Tensor x = random_tensor(Shape{3, 2, 3, 2}, rng);
    BatchNormParams p;
    p.gamma = random_tensor(Shape{2, 1, 1, 1}, rng, 0.5, 1.5);
    p.beta = random_tensor(Shape{2, 1, 1, 1}, rng);
    p.running_mean = Tensor(Shape{2, 1, 1, 1});
    p.running_var = Tensor(Shape{2, 1, 1, 1}, 1.0);
    BatchNormParams scratch = p;
    BatchNormCache cache;
    const Tensor y = batchnorm(x, scratch, Mode::kTrain, &cache);
    const Tensor r = random_like(y, rng);
    const BatchNormGrads g = batchnorm_backward(cache, p, r);
    auto loss = [&] {
      BatchNormParams q = p;
      return dot(r, batchnorm(x, q, Mode::kTrain));
    };
    add_case(out, "batchnorm_train/input", g.input, x, loss);
    add_case(out, "batchnorm_train/gamma", g.gamma, p.gamma, loss);
    add_case(out, "batchnorm_train/beta", g.beta, p.beta, loss);
  }
  {
    Tensor x = random_tensor(Shape{3, 2, 2, 1}, rng);
    DenseParams p{random_tensor(Shape{3, 4, 1, 1}, rng), random_tensor(Shape{3, 1, 1, 1}, rng)};
    const Tensor r = random_like(dense(x, p), rng);
    const DenseGrads g = dense_backward(x, p, r);
    auto loss = [&] { return dot(r, dense(x, p)); };
    add_case(out, "dense/input", g.input, x, loss);
    add_case(out, "dense/weights", g.weights, p.weights, loss);
    add_case(out, "dense/bias", g.bias, p.bias, loss);
  }
  {
    Tensor x = away_from_zero(random_tensor(Shape{2, 2, 3, 3}, rng));
    const Tensor r = random_like(x, rng);
    add_case(out, "relu/input", relu_backward(x, r), x, [&] { return dot(r, relu(x)); });
  }
  {
    Tensor x = random_tensor(Shape{2, 2, 3, 3}, rng, -4.0, 4.0);
    const Tensor r = random_like(x, rng);
    add_case(out, "sigmoid/input", sigmoid_backward(sigmoid(x), r), x,
             [&] { return dot(r, sigmoid(x)); });
  }
  {
    Tensor x = random_tensor(Shape{2, 3, 4, 5}, rng);
    const Tensor r = random_like(global_avg_pool(x), rng);
    add_case(out, "global_avg_pool/input", global_avg_pool_backward(x.shape(), r), x,
             [&] { return dot(r, global_avg_pool(x)); });
  }
  {
    Tensor x = random_tensor(Shape{3, 4, 1, 1}, rng, -2.0, 2.0);
    const Tensor r = random_like(x, rng);
    add_case(out, "softmax/input", softmax_backward(softmax(x), r), x,
             [&] { return dot(r, softmax(x)); });
  }
  {
    Tensor x = random_tensor(Shape{4, 3, 1, 1}, rng, -2.0, 2.0);
    const std::vector<int> labels{0, 2, 1, 2};
    auto loss = [&] {
      const Tensor p = softmax(x);
      double s = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        s += cross_entropy(p.data().subspan(i * 3, 3), static_cast<std::size_t>(labels[i]));
      }
      return s / static_cast<double>(labels.size());
    };
    add_case(out, "softmax_cross_entropy/logits",
             softmax_cross_entropy_backward(softmax(x), labels), x, loss);
  }
  return out;
}

std::vector<GradCase> condenser_gradient_cases(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCase> out;
  Tensor v = random_tensor(Shape{1, 2, 6, 6}, rng);
  AttentionCondenser p = make_condenser(2, 4, default_condenser_groups(2, 4), {3, 3}, {2, 2}, {2, 2});
  p.embed1.weights = random_tensor(p.embed1.weights.shape(), rng);
  p.embed1.bias = random_tensor(p.embed1.bias.shape(), rng, 0.1, 0.5);
  p.embed2.weights = random_tensor(p.embed2.weights.shape(), rng);
  p.embed2.bias = random_tensor(p.embed2.bias.shape(), rng);
  p.scale_logit[0] = 0.3;

  CondenserCache cache;
  const Tensor y = condenser_forward(v, p, &cache);
  const Tensor r = random_like(y, rng);
  const CondenserGrads g = condenser_backward(cache, p, r);
  auto loss = [&] { return dot(r, condenser_forward(v, p)); };
  add_case(out, "condenser/input", g.input, v, loss);
  add_case(out, "condenser/embed1.weight", g.embed1.weights, p.embed1.weights, loss);
  add_case(out, "condenser/embed1.bias", g.embed1.bias, p.embed1.bias, loss);
  add_case(out, "condenser/embed2.weight", g.embed2.weights, p.embed2.weights, loss);
  add_case(out, "condenser/embed2.bias", g.embed2.bias, p.embed2.bias, loss);
  add_case(out, "condenser/scale_logit", Tensor(Shape{1, 1, 1, 1}, {g.scale_logit}), p.scale_logit,
           loss);

  // The switch-unpooling variant shares everything but the expansion.
  AttentionCondenser sw = p;
  sw.expansion = Expansion::kSwitch;
  CondenserCache sc;
  const Tensor ys = condenser_forward(v, sw, &sc);
  const Tensor rs = random_like(ys, rng);
  const CondenserGrads gs = condenser_backward(sc, sw, rs);
  auto sloss = [&] { return dot(rs, condenser_forward(v, sw)); };
  add_case(out, "condenser_switch/input", gs.input, v, sloss);
  add_case(out, "condenser_switch/embed1.weight", gs.embed1.weights, sw.embed1.weights, sloss);
  add_case(out, "condenser_switch/embed2.weight", gs.embed2.weights, sw.embed2.weights, sloss);
  return out;
}

}  // namespace tinykws::testing
