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

#include "tinykws/ops.hpp"
#include "tinykws/tensor.hpp"

namespace tinykws {

// How the condensed embedding is projected back to the input's spatial size.
enum class Expansion { kReplicate, kSwitch };

// One attention condenser acting on C-channel activations V:
//   Q  = maxpool(V)                       condensation
//   K  = embed2(relu(embed1(Q)))          grouped conv, then pointwise conv
//   A  = sigmoid(unpool(K))               expansion to V's spatial size
//   V' = A * (S * V + (1 - S))            selective attention, S = sigmoid(scale_logit)
// S -> 0 gives V' = A; S = 1 gives V' = A * V.
struct AttentionCondenser {
  Window2 pool_window{2, 2};
  Window2 pool_stride{2, 2};
  ConvParams embed1;  // C -> c1, grouped, "same" padding
  ConvParams embed2;  // c1 -> C, 1x1
  Tensor scale_logit = Tensor(Shape{1, 1, 1, 1});
  Expansion expansion = Expansion::kReplicate;

  std::size_t channels() const { return embed1.in_channels(); }
  double scale() const;
  // S = 0 maps to a logit of -inf, S = 1 to +inf; both are exact under sigmoid.
  void set_scale(double s);
  void validate() const;
};

// Largest g <= 4 that divides both the condenser's channel count and c1.
std::size_t default_condenser_groups(std::size_t channels, std::size_t c1);

// Zero-initialized condenser with the given geometry. kernel applies to embed1.
AttentionCondenser make_condenser(std::size_t channels, std::size_t c1, std::size_t groups,
                                  Window2 kernel, Window2 pool_window, Window2 pool_stride);

struct CondenserCache {
  Tensor input;
  PoolRecord pool;
  Tensor hidden_pre;  // embed1(Q), before relu
  Tensor hidden;      // relu(embed1(Q))
  Tensor attention;   // A
  double scale = 0.0;
  bool valid = false;
};

struct CondenserGrads {
  Tensor input;
  ConvGrads embed1;
  ConvGrads embed2;
  double scale_logit = 0.0;
};

// V' = A * (S * V + (1 - S)); S must lie in [0, 1].
Tensor selective_attention(const Tensor& v, const Tensor& a, double s);

Tensor condenser_forward(const Tensor& v, const AttentionCondenser& p,
                         CondenserCache* cache = nullptr);
CondenserGrads condenser_backward(const CondenserCache& cache, const AttentionCondenser& p,
                                  const Tensor& grad_out);

}  // namespace tinykws
