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

#include "tinykws/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tinykws/error.hpp"

namespace tinykws {

namespace {

using Index = std::ptrdiff_t;

// Output positions o in [lo, hi) whose input tap o*stride + tap - pad lies in [0, in).
struct Span1 {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

Span1 valid_outputs(std::size_t tap, std::size_t pad, std::size_t stride, std::size_t in,
                    std::size_t out) {
  const Index s = static_cast<Index>(stride);
  const Index offset = static_cast<Index>(tap) - static_cast<Index>(pad);
  // o*s + offset >= 0  ->  o >= ceil(-offset / s)
  Index lo = 0;
  if (offset < 0) lo = (-offset + s - 1) / s;
  // o*s + offset <= in - 1  ->  o <= floor((in - 1 - offset) / s)
  const Index top = static_cast<Index>(in) - 1 - offset;
  Index hi = top < 0 ? 0 : top / s + 1;
  hi = std::min<Index>(hi, static_cast<Index>(out));
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

struct ConvGeometry {
  std::size_t n, cin, h, w;
  std::size_t cout, cpg, opg, kh, kw;
  std::size_t sh, sw;
  PadAmounts ph, pw;
  std::size_t oh, ow;
};

ConvGeometry conv_geometry(const Shape& xs, const ConvParams& p) {
  p.validate();
  if (xs.c != p.in_channels()) {
    throw ShapeError("conv2d: input has " + std::to_string(xs.c) + " channels, weights expect " +
                     std::to_string(p.in_channels()));
  }
  ConvGeometry g{};
  g.n = xs.n;
  g.cin = xs.c;
  g.h = xs.h;
  g.w = xs.w;
  g.cout = p.out_channels();
  g.cpg = p.weights.shape().c;
  g.opg = g.cout / p.groups;
  g.kh = p.weights.shape().h;
  g.kw = p.weights.shape().w;
  g.sh = p.stride.h;
  g.sw = p.stride.w;
  g.oh = conv_out_extent(g.h, g.kh, g.sh, p.padding);
  g.ow = conv_out_extent(g.w, g.kw, g.sw, p.padding);
  if (p.padding == Padding::kSame) {
    g.ph = same_padding(g.h, g.kh, g.sh);
    g.pw = same_padding(g.w, g.kw, g.sw);
  }
  return g;
}

}  // namespace

void ConvParams::validate() const {
  if (groups == 0) throw InvalidArgument("conv: groups must be positive");
  if (stride.h == 0 || stride.w == 0) throw InvalidArgument("conv: stride must be positive");
  const Shape& ws = weights.shape();
  if (ws.n == 0 || ws.c == 0 || ws.h == 0 || ws.w == 0) {
    throw InvalidArgument("conv: empty weight tensor " + ws.str());
  }
  if (ws.n % groups != 0) {
    throw InvalidArgument("conv: output channels " + std::to_string(ws.n) +
                          " not divisible by groups " + std::to_string(groups));
  }
  if (bias.size() != ws.n) {
    throw InvalidArgument("conv: bias length " + std::to_string(bias.size()) +
                          " != output channels " + std::to_string(ws.n));
  }
}

PadAmounts same_padding(std::size_t in, std::size_t kernel, std::size_t stride) {
  const std::size_t out = (in + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + kernel;
  const std::size_t total = needed > in ? needed - in : 0;
  return {total / 2, total - total / 2};
}

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            Padding padding) {
  if (stride == 0 || kernel == 0) throw InvalidArgument("conv: kernel and stride must be positive");
  if (in == 0) throw ShapeError("conv: empty spatial extent");
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (kernel > in) {
    throw ShapeError("conv: kernel " + std::to_string(kernel) + " larger than input extent " +
                     std::to_string(in));
  }
  return (in - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& x, const ConvParams& p) {
  const ConvGeometry g = conv_geometry(x.shape(), p);
  Tensor out(Shape{g.n, g.cout, g.oh, g.ow});
  const double* xd = x.raw();
  const double* wd = p.weights.raw();
  double* od = out.raw();
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t co = 0; co < g.cout; ++co) {
      double* plane = od + (n * g.cout + co) * g.oh * g.ow;
      std::fill(plane, plane + g.oh * g.ow, p.bias[co]);
      const std::size_t cbase = (co / g.opg) * g.cpg;
      for (std::size_t cl = 0; cl < g.cpg; ++cl) {
        const double* xplane = xd + (n * g.cin + cbase + cl) * g.h * g.w;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
          const Span1 rows = valid_outputs(ki, g.ph.before, g.sh, g.h, g.oh);
          for (std::size_t kj = 0; kj < g.kw; ++kj) {
            const Span1 cols = valid_outputs(kj, g.pw.before, g.sw, g.w, g.ow);
            const double wv = wd[((co * g.cpg + cl) * g.kh + ki) * g.kw + kj];
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              const double* xrow = xplane + (oy * g.sh + ki - g.ph.before) * g.w;
              double* orow = plane + oy * g.ow;
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                orow[ox] += wv * xrow[ox * g.sw + kj - g.pw.before];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out) {
  const ConvGeometry g = conv_geometry(x.shape(), p);
  if (grad_out.shape() != Shape{g.n, g.cout, g.oh, g.ow}) {
    throw ShapeError("conv2d_backward: grad_out shape " + grad_out.shape().str() +
                     " does not match forward output");
  }
  ConvGrads grads{Tensor(x.shape()), Tensor(p.weights.shape()), Tensor(p.bias.shape())};
  const double* xd = x.raw();
  const double* wd = p.weights.raw();
  const double* gd = grad_out.raw();
  double* gx = grads.input.raw();
  double* gw = grads.weights.raw();
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t co = 0; co < g.cout; ++co) {
      const double* gplane = gd + (n * g.cout + co) * g.oh * g.ow;
      double bsum = 0.0;
      for (std::size_t i = 0; i < g.oh * g.ow; ++i) bsum += gplane[i];
      grads.bias[co] += bsum;
      const std::size_t cbase = (co / g.opg) * g.cpg;
      for (std::size_t cl = 0; cl < g.cpg; ++cl) {
        const std::size_t xoff = (n * g.cin + cbase + cl) * g.h * g.w;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
          const Span1 rows = valid_outputs(ki, g.ph.before, g.sh, g.h, g.oh);
          for (std::size_t kj = 0; kj < g.kw; ++kj) {
            const Span1 cols = valid_outputs(kj, g.pw.before, g.sw, g.w, g.ow);
            const std::size_t widx = ((co * g.cpg + cl) * g.kh + ki) * g.kw + kj;
            const double wv = wd[widx];
            double wacc = 0.0;
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              const std::size_t xrow = xoff + (oy * g.sh + ki - g.ph.before) * g.w;
              const double* grow = gplane + oy * g.ow;
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                const std::size_t xi = xrow + ox * g.sw + kj - g.pw.before;
                wacc += grow[ox] * xd[xi];
                gx[xi] += wv * grow[ox];
              }
            }
            gw[widx] += wacc;
          }
        }
      }
    }
  }
  return grads;
}

std::size_t pool_out_extent(std::size_t in, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw InvalidArgument("pool: window and stride must be >= 1");
  if (window > in) {
    throw ShapeError("pool: window " + std::to_string(window) + " exceeds input extent " +
                     std::to_string(in));
  }
  return (in - window) / stride + 1;
}

PoolRecord maxpool2d(const Tensor& x, Window2 window, Window2 stride) {
  const Shape& s = x.shape();
  const std::size_t oh = pool_out_extent(s.h, window.h, stride.h);
  const std::size_t ow = pool_out_extent(s.w, window.w, stride.w);
  PoolRecord rec{Tensor(Shape{s.n, s.c, oh, ow}), {}, window, stride, s};
  rec.argmax.resize(rec.pooled.size());
  std::size_t o = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t py = 0; py < oh; ++py) {
        for (std::size_t px = 0; px < ow; ++px, ++o) {
          std::size_t best = x.index(n, c, py * stride.h, px * stride.w);
          double best_v = x[best];
          for (std::size_t i = 0; i < window.h; ++i) {
            for (std::size_t j = 0; j < window.w; ++j) {
              const std::size_t idx = x.index(n, c, py * stride.h + i, px * stride.w + j);
              // Strict comparison keeps the lowest flat index on ties.
              if (x[idx] > best_v) {
                best_v = x[idx];
                best = idx;
              }
            }
          }
          rec.pooled[o] = best_v;
          rec.argmax[o] = best;
        }
      }
    }
  }
  return rec;
}

Tensor maxpool2d_backward(const PoolRecord& record, const Tensor& grad_out) {
  if (grad_out.shape() != record.pooled.shape()) {
    throw ShapeError("maxpool2d_backward: grad_out shape mismatch");
  }
  Tensor grad_in(record.input_shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[record.argmax[i]] += grad_out[i];
  return grad_in;
}

namespace {

void check_unpool_geometry(Window2 pooled_hw, Window2 window, Window2 stride, Window2 out_hw,
                           const char* op) {
  if (window.h == 0 || window.w == 0 || stride.h == 0 || stride.w == 0) {
    throw InvalidArgument(std::string(op) + ": window and stride must be >= 1");
  }
  const bool ok = out_hw.h >= window.h && out_hw.w >= window.w &&
                  (out_hw.h - window.h) / stride.h + 1 == pooled_hw.h &&
                  (out_hw.w - window.w) / stride.w + 1 == pooled_hw.w;
  if (!ok) {
    throw ShapeError(std::string(op) + ": pooled extent " + std::to_string(pooled_hw.h) + "x" +
                     std::to_string(pooled_hw.w) + " inconsistent with output " +
                     std::to_string(out_hw.h) + "x" + std::to_string(out_hw.w));
  }
}

std::vector<std::size_t> region_map(std::size_t out, std::size_t stride, std::size_t pooled) {
  std::vector<std::size_t> map(out);
  for (std::size_t i = 0; i < out; ++i) map[i] = std::min(i / stride, pooled - 1);
  return map;
}

}  // namespace

Tensor unpool_replicate(const Tensor& pooled, Window2 window, Window2 stride, Window2 out_hw) {
  const Shape& ps = pooled.shape();
  check_unpool_geometry({ps.h, ps.w}, window, stride, out_hw, "unpool_replicate");
  const auto rows = region_map(out_hw.h, stride.h, ps.h);
  const auto cols = region_map(out_hw.w, stride.w, ps.w);
  Tensor out(Shape{ps.n, ps.c, out_hw.h, out_hw.w});
  std::size_t o = 0;
  for (std::size_t n = 0; n < ps.n; ++n) {
    for (std::size_t c = 0; c < ps.c; ++c) {
      for (std::size_t y = 0; y < out_hw.h; ++y) {
        for (std::size_t x = 0; x < out_hw.w; ++x, ++o) out[o] = pooled.at(n, c, rows[y], cols[x]);
      }
    }
  }
  return out;
}

Tensor unpool_replicate_backward(const Tensor& grad_out, Window2 window, Window2 stride,
                                 Window2 pooled_hw) {
  const Shape& gs = grad_out.shape();
  check_unpool_geometry(pooled_hw, window, stride, {gs.h, gs.w}, "unpool_replicate_backward");
  const auto rows = region_map(gs.h, stride.h, pooled_hw.h);
  const auto cols = region_map(gs.w, stride.w, pooled_hw.w);
  Tensor grad(Shape{gs.n, gs.c, pooled_hw.h, pooled_hw.w});
  std::size_t o = 0;
  for (std::size_t n = 0; n < gs.n; ++n) {
    for (std::size_t c = 0; c < gs.c; ++c) {
      for (std::size_t y = 0; y < gs.h; ++y) {
        for (std::size_t x = 0; x < gs.w; ++x, ++o) grad.at(n, c, rows[y], cols[x]) += grad_out[o];
      }
    }
  }
  return grad;
}

Tensor unpool_switch(const Tensor& pooled, const PoolRecord& record) {
  if (pooled.shape() != record.pooled.shape()) throw ShapeError("unpool_switch: shape mismatch");
  Tensor out(record.input_shape);
  for (std::size_t i = 0; i < pooled.size(); ++i) out[record.argmax[i]] = pooled[i];
  return out;
}

Tensor unpool_switch_backward(const Tensor& grad_out, const PoolRecord& record) {
  if (grad_out.shape() != record.input_shape) {
    throw ShapeError("unpool_switch_backward: shape mismatch");
  }
  // Overlapping windows may share a winner; the last writer owns the forward
  // value, so only it receives gradient.
  Tensor grad(record.pooled.shape());
  std::vector<std::size_t> owner(grad_out.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < record.argmax.size(); ++i) owner[record.argmax[i]] = i;
  for (std::size_t pos = 0; pos < owner.size(); ++pos) {
    if (owner[pos] != std::numeric_limits<std::size_t>::max()) grad[owner[pos]] = grad_out[pos];
  }
  return grad;
}

namespace {

void check_bn(const Tensor& x, const BatchNormParams& p) {
  const std::size_t c = p.channels();
  if (x.shape().c != c || p.beta.size() != c || p.running_mean.size() != c ||
      p.running_var.size() != c) {
    throw ShapeError("batchnorm: parameter length does not match " +
                     std::to_string(x.shape().c) + " input channels");
  }
}

}  // namespace

Tensor batchnorm(const Tensor& x, BatchNormParams& p, Mode mode, BatchNormCache* cache) {
  check_bn(x, p);
  if (mode == Mode::kInfer && cache == nullptr) return batchnorm_infer(x, p);
  const Shape& s = x.shape();
  const std::size_t plane = s.h * s.w;
  std::vector<double> mean(s.c), inv_std(s.c);
  if (mode == Mode::kTrain) {
    if (s.n == 0 || plane == 0) throw InvalidArgument("batchnorm: zero batch in train mode");
    const double m = static_cast<double>(s.n * plane);
    for (std::size_t c = 0; c < s.c; ++c) {
      double sum = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const double* xp = x.raw() + x.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) sum += xp[i];
      }
      const double mu = sum / m;
      double sq = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const double* xp = x.raw() + x.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) sq += (xp[i] - mu) * (xp[i] - mu);
      }
      const double var = sq / m;
      mean[c] = mu;
      inv_std[c] = 1.0 / std::sqrt(var + p.eps);
      p.running_mean[c] = (1.0 - p.momentum) * p.running_mean[c] + p.momentum * mu;
      p.running_var[c] = (1.0 - p.momentum) * p.running_var[c] + p.momentum * var;
    }
  } else {
    for (std::size_t c = 0; c < s.c; ++c) {
      mean[c] = p.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(p.running_var[c] + p.eps);
    }
  }
  Tensor out(s);
  Tensor normalized(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = x.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const double xh = (x[base + i] - mean[c]) * inv_std[c];
        normalized[base + i] = xh;
        out[base + i] = p.gamma[c] * xh + p.beta[c];
      }
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return out;
}

Tensor batchnorm_infer(const Tensor& x, const BatchNormParams& p) {
  check_bn(x, p);
  const Shape& s = x.shape();
  const std::size_t plane = s.h * s.w;
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const double inv_std = 1.0 / std::sqrt(p.running_var[c] + p.eps);
      const std::size_t base = x.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        out[base + i] = p.gamma[c] * ((x[base + i] - p.running_mean[c]) * inv_std) + p.beta[c];
      }
    }
  }
  return out;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p,
                                  const Tensor& grad_out) {
  const Shape& s = grad_out.shape();
  if (cache.normalized.shape() != s) throw ShapeError("batchnorm_backward: missing or stale cache");
  const std::size_t plane = s.h * s.w;
  BatchNormGrads g{Tensor(s), Tensor(p.gamma.shape()), Tensor(p.beta.shape())};
  const double m = static_cast<double>(s.n * plane);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t base = grad_out.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += grad_out[base + i];
        sum_gx += grad_out[base + i] * cache.normalized[base + i];
      }
    }
    g.beta[c] = sum_g;
    g.gamma[c] = sum_gx;
    const double scale_c = p.gamma[c] * cache.inv_std[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t base = grad_out.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        if (cache.mode == Mode::kTrain) {
          g.input[base + i] =
              scale_c * (grad_out[base + i] - sum_g / m - cache.normalized[base + i] * sum_gx / m);
        } else {
          g.input[base + i] = scale_c * grad_out[base + i];
        }
      }
    }
  }
  return g;
}

std::vector<double> dense(std::span<const double> x, const DenseParams& p) {
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  if (x.size() != in) {
    throw ShapeError("dense: input length " + std::to_string(x.size()) + " != weight columns " +
                     std::to_string(in));
  }
  if (p.bias.size() != out) throw ShapeError("dense: bias length != weight rows");
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double acc = p.bias[o];
    const double* row = p.weights.raw() + o * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

Tensor dense(const Tensor& x, const DenseParams& p) {
  const Shape& s = x.shape();
  const std::size_t per = s.c * s.h * s.w;
  Tensor out(Shape{s.n, p.out_features(), 1, 1});
  for (std::size_t n = 0; n < s.n; ++n) {
    const auto y = dense(x.data().subspan(n * per, per), p);
    std::copy(y.begin(), y.end(), out.raw() + n * y.size());
  }
  return out;
}

DenseGrads dense_backward(const Tensor& x, const DenseParams& p, const Tensor& grad_out) {
  const Shape& s = x.shape();
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  if (s.c * s.h * s.w != in) throw ShapeError("dense_backward: input length mismatch");
  if (grad_out.shape() != Shape{s.n, out, 1, 1}) {
    throw ShapeError("dense_backward: grad_out shape " + grad_out.shape().str() +
                     " does not match forward output");
  }
  DenseGrads g{Tensor(s), Tensor(p.weights.shape()), Tensor(p.bias.shape())};
  for (std::size_t n = 0; n < s.n; ++n) {
    const double* xr = x.raw() + n * in;
    const double* gr = grad_out.raw() + n * out;
    double* gx = g.input.raw() + n * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = gr[o];
      g.bias[o] += go;
      const double* wr = p.weights.raw() + o * in;
      double* gw = g.weights.raw() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += go * xr[i];
        gx[i] += go * wr[i];
      }
    }
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) throw ShapeError("relu_backward: shape mismatch");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
  return g;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  if (y.shape() != grad_out.shape()) throw ShapeError("sigmoid_backward: shape mismatch");
  Tensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i] * (1.0 - y[i]);
  return g;
}

Tensor global_avg_pool(const Tensor& x) {
  const Shape& s = x.shape();
  const std::size_t plane = s.h * s.w;
  if (plane == 0) throw ShapeError("global_avg_pool: empty spatial extent");
  Tensor out(Shape{s.n, s.c, 1, 1});
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    double sum = 0.0;
    const double* p = x.raw() + nc * plane;
    for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    out[nc] = sum / static_cast<double>(plane);
  }
  return out;
}

Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_out) {
  if (grad_out.shape() != Shape{input_shape.n, input_shape.c, 1, 1}) {
    throw ShapeError("global_avg_pool_backward: grad_out shape mismatch");
  }
  const std::size_t plane = input_shape.h * input_shape.w;
  Tensor g(input_shape);
  for (std::size_t nc = 0; nc < input_shape.n * input_shape.c; ++nc) {
    const double v = grad_out[nc] / static_cast<double>(plane);
    std::fill(g.raw() + nc * plane, g.raw() + (nc + 1) * plane, v);
  }
  return g;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> y(logits.size());
  if (logits.empty()) return y;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    y[i] = std::exp(logits[i] - mx);
    sum += y[i];
  }
  for (double& v : y) v /= sum;
  return y;
}

Tensor softmax(const Tensor& logits) {
  const Shape& s = logits.shape();
  const std::size_t k = s.c * s.h * s.w;
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const auto y = softmax(logits.data().subspan(n * k, k));
    std::copy(y.begin(), y.end(), out.raw() + n * k);
  }
  return out;
}

Tensor softmax_backward(const Tensor& probs, const Tensor& grad_out) {
  if (probs.shape() != grad_out.shape()) throw ShapeError("softmax_backward: shape mismatch");
  const Shape& s = probs.shape();
  const std::size_t k = s.c * s.h * s.w;
  Tensor g(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += grad_out[n * k + i] * probs[n * k + i];
    for (std::size_t i = 0; i < k; ++i) {
      g[n * k + i] = probs[n * k + i] * (grad_out[n * k + i] - dot);
    }
  }
  return g;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw InvalidArgument("cross_entropy: label " + std::to_string(label) + " out of range for " +
                          std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], 1e-12));
}

Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const int> labels) {
  const Shape& s = probs.shape();
  const std::size_t k = s.c * s.h * s.w;
  if (labels.size() != s.n) throw ShapeError("softmax_cross_entropy_backward: label count != batch");
  Tensor g = probs;
  const double inv_n = 1.0 / static_cast<double>(s.n);
  for (std::size_t n = 0; n < s.n; ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= k) {
      throw InvalidArgument("softmax_cross_entropy_backward: label out of range");
    }
    g[n * k + static_cast<std::size_t>(labels[n])] -= 1.0;
    for (std::size_t i = 0; i < k; ++i) g[n * k + i] *= inv_n;
  }
  return g;
}

}  // namespace tinykws
