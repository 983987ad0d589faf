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

// Independent reference implementations and helpers shared by the unit and
// acceptance suites. Nothing here calls the kernels it is used to check.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tinykws/condenser.hpp"
#include "tinykws/config.hpp"
#include "tinykws/rng.hpp"
#include "tinykws/tensor.hpp"

namespace tinykws::testing {

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
// whose true gradient is ~0 from dividing by round-off noise.
double relative_error(double analytic, double numeric, double floor = 1e-7);

// Central differences of a scalar function with respect to every element of
// `x`, perturbing in place and restoring each coordinate afterwards.
std::vector<double> numeric_gradient(Tensor& x, const std::function<double()>& f, double h = 1e-5);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};
GradCheck compare_gradients(const Tensor& analytic, const std::vector<double>& numeric,
                            double floor = 1e-7);

// Fixed random projection used to turn a tensor output into a scalar loss.
Tensor random_like(const Tensor& t, Rng& rng);
double dot(const Tensor& a, const Tensor& b);

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0);

// Direct 7-loop convolution. "same" padding puts floor(total/2) zeros before
// and the rest after, total = max((ceil(in/stride) - 1) * stride + k - in, 0).
// When `mult_adds` is non-null it is incremented once per multiply-accumulate.
Tensor naive_conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias, std::size_t groups,
                    std::size_t stride_h, std::size_t stride_w, bool same,
                    std::uint64_t* mult_adds = nullptr);

// |X_k|^2 for k in [0, n_fft/2] from the DFT sum, frame zero-padded to n_fft.
std::vector<double> naive_power_spectrum(const std::vector<double>& frame, std::size_t n_fft);

// Straight-line MFCC: 16 kHz, 480/160 Hamming frames, 512-point DFT, 40
// triangular mel filters over [20, 4000] Hz, natural log with a 1e-10
// floor on filter energies, orthonormal DCT-II, 40 coefficients.
// Returns frames * 40 values, row major.
std::vector<double> reference_mfcc(const std::vector<double>& signal);

// A random config that passes infer_shapes: conv stem, up to two condensers,
// optional second conv, then global pooling, dense and softmax.
ModelConfig random_valid_config(Rng& rng);

// maxpool -> grouped conv -> ReLU -> pointwise conv -> replication unpool ->
// sigmoid -> V' = A (S V + 1 - S), written out with the loop oracles. Writes
// the attention map to `attention` when non-null.
Tensor manual_condenser(const Tensor& v, const AttentionCondenser& p, Tensor* attention = nullptr);

// Parameter count per layer index from count_params rows.
std::vector<std::size_t> counted_params_per_layer(const ModelConfig& config);

// Parameter count per layer index from the built model's registry.
std::vector<std::size_t> registry_params_per_layer(const ModelConfig& config);

// Unique scratch directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

}  // namespace tinykws::testing
