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
#include <span>
#include <vector>

#include "tinykws/tensor.hpp"

namespace tinykws {

struct Window2 {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Window2&, const Window2&) = default;
};

enum class Padding { kValid, kSame };

enum class Mode { kTrain, kInfer };

// Convolution weights are (C_out, C_in / groups, kH, kW); bias is (C_out,1,1,1).
struct ConvParams {
  Tensor weights;
  Tensor bias;
  std::size_t groups = 1;
  Window2 stride{1, 1};
  Padding padding = Padding::kValid;

  std::size_t out_channels() const { return weights.shape().n; }
  std::size_t in_channels() const { return weights.shape().c * groups; }
  Window2 kernel() const { return {weights.shape().h, weights.shape().w}; }
  // Throws InvalidArgument on broken group divisibility or bias length.
  void validate() const;
};

struct ConvGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

// Zero padding on each side of one spatial axis; "same" splits the total
// floor/ceil between leading and trailing edges.
struct PadAmounts {
  std::size_t before = 0;
  std::size_t after = 0;
};
PadAmounts same_padding(std::size_t in, std::size_t kernel, std::size_t stride);
// Output extent along one axis; throws ShapeError when the kernel does not fit.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, Padding padding);

Tensor conv2d(const Tensor& x, const ConvParams& p);
ConvGrads conv2d_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out);

// Max pooling with recorded winners. argmax holds flat indices into the
// pooled input tensor, one per pooled element.
struct PoolRecord {
  Tensor pooled;
  std::vector<std::size_t> argmax;
  Window2 window;
  Window2 stride;
  Shape input_shape;
};

std::size_t pool_out_extent(std::size_t in, std::size_t window, std::size_t stride);
PoolRecord maxpool2d(const Tensor& x, Window2 window, Window2 stride);
Tensor maxpool2d_backward(const PoolRecord& record, const Tensor& grad_out);

// Replication unpooling: output (h, w) takes the pooled value of region
// (min(h / sH, Hp - 1), min(w / sW, Wp - 1)), so positions in the trailing
// remainder rows or columns copy the nearest region.
Tensor unpool_replicate(const Tensor& pooled, Window2 window, Window2 stride, Window2 out_hw);
// Sums the gradient over every output position mapped to each region.
Tensor unpool_replicate_backward(const Tensor& grad_out, Window2 window, Window2 stride,
                                 Window2 pooled_hw);
// Switch unpooling: each pooled value returns to its argmax position, zeros elsewhere.
Tensor unpool_switch(const Tensor& pooled, const PoolRecord& record);
Tensor unpool_switch_backward(const Tensor& grad_out, const PoolRecord& record);

// gamma, beta, running_mean, running_var are (C,1,1,1). momentum weights the
// new batch statistic: running = (1 - momentum) * running + momentum * batch.
struct BatchNormParams {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double eps = 1e-5;
  double momentum = 0.1;

  std::size_t channels() const { return gamma.size(); }
};

struct BatchNormCache {
  Tensor normalized;
  std::vector<double> inv_std;
  Mode mode = Mode::kInfer;
};

struct BatchNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};

// Train mode normalizes with biased batch statistics over (N, H, W) and
// updates the running statistics in p; infer mode leaves p untouched.
Tensor batchnorm(const Tensor& x, BatchNormParams& p, Mode mode, BatchNormCache* cache = nullptr);
Tensor batchnorm_infer(const Tensor& x, const BatchNormParams& p);
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p,
                                  const Tensor& grad_out);

// Weights (out, in, 1, 1), bias (out, 1, 1, 1).
struct DenseParams {
  Tensor weights;
  Tensor bias;

  std::size_t in_features() const { return weights.shape().c; }
  std::size_t out_features() const { return weights.shape().n; }
};

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

std::vector<double> dense(std::span<const double> x, const DenseParams& p);
// Flattens each sample of x (C*H*W values) and returns (N, out, 1, 1).
Tensor dense(const Tensor& x, const DenseParams& p);
DenseGrads dense_backward(const Tensor& x, const DenseParams& p, const Tensor& grad_out);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);
double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
// Takes the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_out);

std::vector<double> softmax(std::span<const double> logits);
// Row-wise over every sample of an (N, K, 1, 1) tensor.
Tensor softmax(const Tensor& logits);
Tensor softmax_backward(const Tensor& probs, const Tensor& grad_out);

// -ln(max(probs[label], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t label);
// Gradient of mean cross-entropy w.r.t. the logits feeding the softmax:
// (probs - onehot(label)) / N.
Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const int> labels);

}  // namespace tinykws
