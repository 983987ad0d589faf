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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tinykws/rng.hpp"

namespace tinykws {

// (N, C, H, W). H is time frames and W is the cepstral coefficient axis for
// audio inputs.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  // Throws InvalidArgument when the product overflows size_t.
  std::size_t numel() const;
  std::array<std::size_t, 4> dims() const { return {n, c, h, w}; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense row-major rank-4 array of doubles. Value type; the free functions in
// this header never modify their arguments.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(shape, 0.0); }
  static Tensor constant(Shape shape, double value) { return Tensor(shape, value); }
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng);
  // N(0, 2 / fan_in).
  static Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* raw() noexcept { return data_.data(); }
  const double* raw() const noexcept { return data_.data(); }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
    return data_[index(n, c, h, w)];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data_[index(n, c, h, w)];
  }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// out[i] = a[i] * b[broadcast(i)]; every dim of b equals a's or is 1.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor reshape(const Tensor& a, Shape shape);

// Shorthand for tests and small literals: a (1,1,h,w) tensor.
Tensor matrix(std::size_t h, std::size_t w, std::vector<double> values);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace tinykws
