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
#include <memory>
#include <span>
#include <vector>

#include "tinykws/tensor.hpp"

namespace tinykws {

struct FrontendConfig {
  double sample_rate = 16000.0;
  double window_ms = 30.0;
  double hop_ms = 10.0;
  double fmin = 20.0;
  double fmax = 4000.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 40;
  std::size_t n_mfcc = 40;
  double log_floor = 1e-10;
  double clip_seconds = 1.0;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  std::size_t clip_samples() const;
  std::size_t n_bins() const { return n_fft / 2 + 1; }
  void validate() const;
};

// T x n_mfcc coefficients, row-major by frame.
struct MfccStack {
  std::size_t frames = 0;
  std::size_t coeffs = 0;
  std::vector<double> values;
  std::size_t source_length = 0;

  double at(std::size_t t, std::size_t k) const { return values[t * coeffs + k]; }
  // (1, 1, frames, coeffs), the model input layout.
  Tensor to_tensor() const;
};

// Symmetric Hamming window: 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> hamming_window(std::size_t n);

// floor((L - W) / H) + 1; zero when L < W.
std::size_t frame_count(std::size_t length, const FrontendConfig& cfg);

// Hamming-windowed frames of window_samples() taken every hop_samples().
// Throws InvalidArgument when the signal is shorter than one window.
std::vector<std::vector<double>> frame_signal(std::span<const double> signal,
                                              const FrontendConfig& cfg);

// |DFT|^2 of the frame zero-padded to n_fft, bins 0..n_fft/2.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft);

// Reusable n_fft-point real FFT.
class PowerSpectrum {
 public:
  explicit PowerSpectrum(std::size_t n_fft);
  ~PowerSpectrum();
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  std::vector<double> operator()(std::span<const double> frame);
  std::size_t n_fft() const { return n_fft_; }

 private:
  struct Plan;
  std::size_t n_fft_;
  std::unique_ptr<Plan> plan_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with edges evenly spaced in mel between fmin and fmax.
// Row-major n_mels x n_bins. Bins at or outside the band edges weigh zero.
struct Filterbank {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;

  double at(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
};
Filterbank mel_filterbank(const FrontendConfig& cfg);

// Orthonormal DCT-II.
std::vector<double> dct2_ortho(std::span<const double> x);

// Pads or truncates to clip_samples(), then per frame: power spectrum,
// filterbank, natural log with floor, orthonormal DCT, first n_mfcc terms.
MfccStack mfcc_stack(std::span<const double> signal, const FrontendConfig& cfg = {});

// Holds the window, filterbank, DCT basis and FFT plan across many clips.
class MfccExtractor {
 public:
  explicit MfccExtractor(FrontendConfig cfg = {});
  MfccStack operator()(std::span<const double> signal);
  const FrontendConfig& config() const { return cfg_; }

 private:
  FrontendConfig cfg_;
  std::vector<double> window_;
  Filterbank bank_;
  std::vector<double> dct_;  // n_mfcc x n_mels
  PowerSpectrum spectrum_;
};

}  // namespace tinykws
