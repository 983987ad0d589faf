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

#include "tinykws/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "tinykws/error.hpp"

namespace tinykws {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t ms_to_samples(double ms, double rate) {
  return static_cast<std::size_t>(std::llround(ms * rate / 1000.0));
}

}  // namespace

std::size_t FrontendConfig::window_samples() const { return ms_to_samples(window_ms, sample_rate); }
std::size_t FrontendConfig::hop_samples() const { return ms_to_samples(hop_ms, sample_rate); }
std::size_t FrontendConfig::clip_samples() const {
  return static_cast<std::size_t>(std::llround(clip_seconds * sample_rate));
}

void FrontendConfig::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidArgument("frontend: sample_rate must be positive");
  if (window_samples() == 0 || hop_samples() == 0) {
    throw InvalidArgument("frontend: window and hop must span at least one sample");
  }
  if (window_samples() > n_fft) throw InvalidArgument("frontend: window longer than n_fft");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw InvalidArgument("frontend: need 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (n_mels == 0 || n_mfcc == 0 || n_mfcc > n_mels) {
    throw InvalidArgument("frontend: need 0 < n_mfcc <= n_mels");
  }
  if (!(log_floor > 0.0)) throw InvalidArgument("frontend: log_floor must be positive");
}

Tensor MfccStack::to_tensor() const { return Tensor(Shape{1, 1, frames, coeffs}, values); }

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

std::size_t frame_count(std::size_t length, const FrontendConfig& cfg) {
  const std::size_t win = cfg.window_samples();
  if (length < win) return 0;
  return (length - win) / cfg.hop_samples() + 1;
}

std::vector<std::vector<double>> frame_signal(std::span<const double> signal,
                                              const FrontendConfig& cfg) {
  cfg.validate();
  const std::size_t win = cfg.window_samples();
  const std::size_t hop = cfg.hop_samples();
  if (signal.size() < win) {
    throw InvalidArgument("frame_signal: " + std::to_string(signal.size()) +
                          " samples is shorter than one " + std::to_string(win) + "-sample window");
  }
  const auto window = hamming_window(win);
  const std::size_t count = frame_count(signal.size(), cfg);
  std::vector<std::vector<double>> frames(count, std::vector<double>(win));
  for (std::size_t f = 0; f < count; ++f) {
    for (std::size_t i = 0; i < win; ++i) frames[f][i] = signal[f * hop + i] * window[i];
  }
  return frames;
}

struct PowerSpectrum::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

PowerSpectrum::PowerSpectrum(std::size_t n_fft) : n_fft_(n_fft), plan_(std::make_unique<Plan>()) {
  if (n_fft < 2) throw InvalidArgument("power_spectrum: n_fft must be at least 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_->in = fftw_alloc_real(n_fft);
  plan_->out = fftw_alloc_complex(n_fft / 2 + 1);
  plan_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), plan_->in, plan_->out, FFTW_ESTIMATE);
  if (plan_->in == nullptr || plan_->out == nullptr || plan_->plan == nullptr) {
    throw Error("power_spectrum: FFT plan allocation failed");
  }
}

PowerSpectrum::~PowerSpectrum() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_->plan != nullptr) fftw_destroy_plan(plan_->plan);
  fftw_free(plan_->in);
  fftw_free(plan_->out);
}

std::vector<double> PowerSpectrum::operator()(std::span<const double> frame) {
  if (frame.size() > n_fft_) {
    throw InvalidArgument("power_spectrum: frame of " + std::to_string(frame.size()) +
                          " samples exceeds n_fft " + std::to_string(n_fft_));
  }
  std::copy(frame.begin(), frame.end(), plan_->in);
  std::fill(plan_->in + frame.size(), plan_->in + n_fft_, 0.0);
  fftw_execute(plan_->plan);
  std::vector<double> power(n_fft_ / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double re = plan_->out[k][0];
    const double im = plan_->out[k][1];
    power[k] = re * re + im * im;
  }
  return power;
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft) {
  PowerSpectrum ps(n_fft);
  return ps(frame);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Filterbank mel_filterbank(const FrontendConfig& cfg) {
  cfg.validate();
  Filterbank fb{cfg.n_mels, cfg.n_bins(), {}};
  fb.weights.assign(fb.rows * fb.cols, 0.0);
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(cfg.n_mels + 1));
  }
  // Pin the outer edges so the mel round trip cannot leak past the band.
  edges.front() = cfg.fmin;
  edges.back() = cfg.fmax;
  const double bin_hz = cfg.sample_rate / static_cast<double>(cfg.n_fft);
  for (std::size_t r = 0; r < fb.rows; ++r) {
    const double left = edges[r];
    const double center = edges[r + 1];
    const double right = edges[r + 2];
    double sum = 0.0;
    for (std::size_t k = 0; k < fb.cols; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb.weights[r * fb.cols + k] = w;
      sum += w;
    }
    if (!(sum > 0.0)) {
      throw InvalidArgument("mel_filterbank: filter " + std::to_string(r) +
                            " covers no FFT bin; too many filters for n_fft " +
                            std::to_string(cfg.n_fft));
    }
  }
  return fb;
}

namespace {

std::vector<double> dct_basis(std::size_t n_out, std::size_t n_in) {
  std::vector<double> basis(n_out * n_in);
  const double n = static_cast<double>(n_in);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < n_in; ++i) {
      basis[k * n_in + i] =
          s * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                       (2.0 * n));
    }
  }
  return basis;
}

}  // namespace

std::vector<double> dct2_ortho(std::span<const double> x) {
  const auto basis = dct_basis(x.size(), x.size());
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) y[k] += basis[k * x.size() + i] * x[i];
  }
  return y;
}

MfccExtractor::MfccExtractor(FrontendConfig cfg)
    : cfg_(cfg),
      window_(hamming_window(cfg.window_samples())),
      bank_(mel_filterbank(cfg)),
      dct_(dct_basis(cfg.n_mfcc, cfg.n_mels)),
      spectrum_(cfg.n_fft) {}

MfccStack MfccExtractor::operator()(std::span<const double> signal) {
  if (signal.empty()) throw InvalidArgument("mfcc_stack: empty signal");
  const std::size_t clip = cfg_.clip_samples();
  std::vector<double> padded(clip, 0.0);
  std::copy_n(signal.begin(), std::min(clip, signal.size()), padded.begin());

  const std::size_t win = cfg_.window_samples();
  const std::size_t hop = cfg_.hop_samples();
  MfccStack stack;
  stack.frames = frame_count(clip, cfg_);
  if (stack.frames == 0) throw InvalidArgument("mfcc_stack: clip shorter than one window");
  stack.coeffs = cfg_.n_mfcc;
  stack.source_length = signal.size();
  stack.values.resize(stack.frames * stack.coeffs);

  std::vector<double> frame(win);
  std::vector<double> log_mel(cfg_.n_mels);
  for (std::size_t t = 0; t < stack.frames; ++t) {
    for (std::size_t i = 0; i < win; ++i) frame[i] = padded[t * hop + i] * window_[i];
    const auto power = spectrum_(frame);
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bank_.cols; ++k) e += bank_.at(m, k) * power[k];
      log_mel[m] = std::log(std::max(e, cfg_.log_floor));
    }
    for (std::size_t k = 0; k < cfg_.n_mfcc; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < cfg_.n_mels; ++m) c += dct_[k * cfg_.n_mels + m] * log_mel[m];
      stack.values[t * stack.coeffs + k] = c;
    }
  }
  return stack;
}

MfccStack mfcc_stack(std::span<const double> signal, const FrontendConfig& cfg) {
  MfccExtractor extract(cfg);
  return extract(signal);
}

}  // namespace tinykws
