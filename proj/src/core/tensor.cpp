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

#include "tinykws/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tinykws/error.hpp"

namespace tinykws {

std::size_t Shape::numel() const {
  std::size_t total = 1;
  for (std::size_t d : dims()) {
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d) {
      throw InvalidArgument("tensor shape " + str() + " overflows the index range");
    }
    total *= d;
  }
  return total;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
  }
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data_) v = rng.uniform(lo, hi);
  return t;
}

Tensor Tensor::he_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  if (fan_in == 0) throw InvalidArgument("he_normal: fan_in must be positive");
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  Tensor t(shape);
  for (double& v : t.data_) v = rng.normal(0.0, stddev);
  return t;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void check_broadcast(const Shape& a, const Shape& b, const char* op) {
  const auto ad = a.dims();
  const auto bd = b.dims();
  for (std::size_t i = 0; i < 4; ++i) {
    if (bd[i] != ad[i] && bd[i] != 1) {
      throw ShapeError(std::string(op) + ": shape " + b.str() + " does not broadcast to " + a.str());
    }
  }
}

template <typename BinaryOp>
Tensor broadcast_apply(const Tensor& a, const Tensor& b, const char* name, BinaryOp op) {
  check_broadcast(a.shape(), b.shape(), name);
  Tensor out(a.shape());
  if (a.shape() == b.shape()) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
    return out;
  }
  const Shape& s = a.shape();
  const Shape& bs = b.shape();
  std::size_t i = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    const std::size_t bn = bs.n == 1 ? 0 : n;
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t bc = bs.c == 1 ? 0 : c;
      for (std::size_t h = 0; h < s.h; ++h) {
        const std::size_t bh = bs.h == 1 ? 0 : h;
        for (std::size_t w = 0; w < s.w; ++w, ++i) {
          const std::size_t bw = bs.w == 1 ? 0 : w;
          out[i] = op(a[i], b.at(bn, bc, bh, bw));
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_apply(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_apply(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_apply(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape.numel() != a.size()) {
    throw ShapeError("reshape: cannot view " + a.shape().str() + " as " + shape.str());
  }
  return Tensor(shape, std::vector<double>(a.data().begin(), a.data().end()));
}

Tensor matrix(std::size_t h, std::size_t w, std::vector<double> values) {
  return Tensor(Shape{1, 1, h, w}, std::move(values));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace tinykws
