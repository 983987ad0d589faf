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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinykws/dsp.hpp"
#include "tinykws/rng.hpp"
#include "tinykws/tensor.hpp"
#include "tinykws/wav.hpp"

namespace tinykws {

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split split);
// Accepts "train", "val"/"validation", "test"/"testing".
Split parse_split(std::string_view name);

// Speaker-consistent split in the Speech Commands convention: take the file's
// basename, drop everything from "_nohash_" on, SHA-1 the rest, keep the hash
// modulo 2^27 and scale it to a percentage in [0, 100]. Below val_pct is
// validation, below val_pct + test_pct is test, the rest is training.
Split split_assign(std::string_view path, double val_pct, double test_pct);

inline constexpr std::string_view kBackgroundNoiseDir = "_background_noise_";
inline constexpr std::string_view kUnknownLabel = "_unknown_";

struct ManifestEntry {
  std::string path;  // relative to the dataset root, '/'-separated
  int label = 0;
  Split split = Split::kTrain;
};

struct SampleManifest {
  std::string root;
  std::vector<std::string> labels;  // index = label id
  std::vector<ManifestEntry> entries;  // sorted by path

  std::size_t count(Split split) const;
  // {"labels": [...], "entries": [{"path", "label", "split"}]}
  std::string to_json(int indent = 2) const;
};

struct ScanOptions {
  // Labels in class-id order. Empty means every label directory, sorted.
  std::vector<std::string> labels;
  // Collect directories outside `labels` into a trailing "_unknown_" class
  // instead of skipping them.
  bool map_unknown = false;
  double val_pct = 10.0;
  double test_pct = 10.0;
};

SampleManifest scan_dataset(const std::string& root, const ScanOptions& options = {});

struct LabeledClip {
  std::string name;
  AudioClip clip;
  int label = 0;
  Split split = Split::kTrain;
};

double synth_class_frequency(std::size_t label);

// Class k is a one-second tone at synth_class_frequency(k), amplitude 0.5 and
// random phase, plus N(0, 0.05^2) noise. Splits come from split_assign on
// the generated names.
std::vector<LabeledClip> synth_dataset(std::size_t n_per_class, std::size_t n_classes,
                                       std::uint64_t seed, double val_pct = 10.0,
                                       double test_pct = 10.0);

// Adds a random segment of `noise` scaled to the requested SNR, then clips to [-1, 1].
AudioClip mix_background(const AudioClip& clip, const AudioClip& noise, double snr_db, Rng& rng);

// Featurized samples for one split; every sample shares `sample_shape`.
struct FeatureSet {
  Shape sample_shape{1, 1, 98, 40};
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  void add(const MfccStack& stack, int label);
  // Stacks the selected samples into an (N, C, H, W) batch.
  Tensor batch(std::span<const std::size_t> indices) const;
};

struct FeatureSplits {
  std::vector<std::string> labels;
  FeatureSet train;
  FeatureSet val;
  FeatureSet test;

  FeatureSet& split(Split s);
  const FeatureSet& split(Split s) const;
};

struct NoiseMixing {
  double snr_db = 10.0;
  double probability = 0.8;
  std::uint64_t seed = 0;
};

// Decodes and featurizes every manifest entry. Clips must be 16 kHz. When
// noise mixing is requested, training clips are mixed with segments from
// the root's _background_noise_ directory.
FeatureSplits featurize_manifest(const SampleManifest& manifest, const FrontendConfig& cfg = {},
                                 std::optional<NoiseMixing> noise = std::nullopt);
FeatureSplits featurize_clips(std::span<const LabeledClip> clips, std::vector<std::string> labels,
                              const FrontendConfig& cfg = {});

}  // namespace tinykws
