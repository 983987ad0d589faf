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

#include "tinykws/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "json.hpp"
#include "tinykws/error.hpp"

namespace tinykws {

namespace fs = std::filesystem;

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train" || name == "training") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test" || name == "testing") return Split::kTest;
  throw InvalidArgument("unknown split \"" + std::string(name) + "\" (train, val, test)");
}

Split split_assign(std::string_view path, double val_pct, double test_pct) {
  if (!(val_pct >= 0.0 && test_pct >= 0.0 && val_pct + test_pct < 100.0)) {
    throw InvalidArgument("split percentages must be non-negative and sum below 100");
  }
  std::string_view base = path;
  if (const auto slash = base.find_last_of("/\\"); slash != std::string_view::npos) {
    base = base.substr(slash + 1);
  }
  if (const auto tag = base.find("_nohash_"); tag != std::string_view::npos) {
    base = base.substr(0, tag);
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(base.data(), base.size(), digest, &len, EVP_sha1(), nullptr) != 1 || len != 20) {
    throw Error("split_assign: SHA-1 failed");
  }
  // The hex digest as an integer modulo 2^27 is its low 27 bits.
  const std::uint32_t low = static_cast<std::uint32_t>(digest[19]) |
                            static_cast<std::uint32_t>(digest[18]) << 8 |
                            static_cast<std::uint32_t>(digest[17]) << 16 |
                            static_cast<std::uint32_t>(digest[16] & 0x07) << 24;
  constexpr double kMaxPerClass = 134217727.0;  // 2^27 - 1
  const double pct = static_cast<double>(low) * (100.0 / kMaxPerClass);
  if (pct < val_pct) return Split::kVal;
  if (pct < val_pct + test_pct) return Split::kTest;
  return Split::kTrain;
}

std::size_t SampleManifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == split; }));
}

std::string SampleManifest::to_json(int indent) const {
  nlohmann::json j;
  j["labels"] = labels;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    list.push_back({{"path", e.path},
                    {"label", labels.at(static_cast<std::size_t>(e.label))},
                    {"split", std::string(split_name(e.split))}});
  }
  j["entries"] = std::move(list);
  return j.dump(indent);
}

namespace {

std::vector<std::string> sorted_wavs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (!f.is_regular_file()) continue;
    std::string ext = f.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") names.push_back(f.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

SampleManifest scan_dataset(const std::string& root, const ScanOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("dataset root " + root + " is not a directory");
  std::vector<std::string> dirs;
  for (const auto& d : fs::directory_iterator(root)) {
    if (d.is_directory() && d.path().filename() != kBackgroundNoiseDir) {
      dirs.push_back(d.path().filename().string());
    }
  }
  std::sort(dirs.begin(), dirs.end());

  SampleManifest m;
  m.root = root;
  m.labels = options.labels.empty() ? dirs : options.labels;
  if (m.labels.empty()) throw InvalidArgument("dataset " + root + " has no label directories");
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    if (!ids.emplace(m.labels[i], static_cast<int>(i)).second) {
      throw InvalidArgument("duplicate label \"" + m.labels[i] + "\"");
    }
  }
  int unknown_id = -1;
  if (options.map_unknown) {
    if (ids.count(std::string(kUnknownLabel))) {
      throw InvalidArgument("label list already contains " + std::string(kUnknownLabel));
    }
    unknown_id = static_cast<int>(m.labels.size());
    m.labels.emplace_back(kUnknownLabel);
  }

  for (const auto& dir : dirs) {
    int label = -1;
    if (auto it = ids.find(dir); it != ids.end()) {
      label = it->second;
    } else if (unknown_id >= 0) {
      label = unknown_id;
    } else {
      continue;
    }
    for (const auto& name : sorted_wavs(fs::path(root) / dir)) {
      const std::string rel = dir + "/" + name;
      m.entries.push_back({rel, label, split_assign(rel, options.val_pct, options.test_pct)});
    }
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  if (m.entries.empty()) throw InvalidArgument("dataset " + root + " contains no matching WAV files");
  return m;
}

double synth_class_frequency(std::size_t label) { return 400.0 + 300.0 * static_cast<double>(label); }

std::vector<LabeledClip> synth_dataset(std::size_t n_per_class, std::size_t n_classes,
                                       std::uint64_t seed, double val_pct, double test_pct) {
  if (n_classes < 2) throw InvalidArgument("synth_dataset: need at least 2 classes");
  constexpr std::uint32_t kRate = 16000;
  Rng rng(seed);
  std::vector<LabeledClip> clips;
  clips.reserve(n_per_class * n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    const double freq = synth_class_frequency(k);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      LabeledClip lc;
      lc.name = "class" + std::to_string(k) + "/clip" + std::to_string(i) + "_nohash_0.wav";
      lc.label = static_cast<int>(k);
      lc.split = split_assign(lc.name, val_pct, test_pct);
      lc.clip.sample_rate = kRate;
      lc.clip.samples.resize(kRate);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t t = 0; t < kRate; ++t) {
        const double tone =
            0.5 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / kRate + phase);
        lc.clip.samples[t] = std::clamp(tone + rng.normal(0.0, 0.05), -1.0, 1.0);
      }
      clips.push_back(std::move(lc));
    }
  }
  return clips;
}

AudioClip mix_background(const AudioClip& clip, const AudioClip& noise, double snr_db, Rng& rng) {
  if (noise.samples.empty() || clip.samples.empty()) return clip;
  double ps = 0.0;
  for (double v : clip.samples) ps += v * v;
  const std::size_t offset = static_cast<std::size_t>(rng.below(noise.samples.size()));
  std::vector<double> segment(clip.samples.size());
  double pn = 0.0;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    segment[i] = noise.samples[(offset + i) % noise.samples.size()];
    pn += segment[i] * segment[i];
  }
  if (pn == 0.0 || ps == 0.0) return clip;
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  AudioClip out = clip;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    out.samples[i] = std::clamp(out.samples[i] + gain * segment[i], -1.0, 1.0);
  }
  return out;
}

void FeatureSet::add(const MfccStack& stack, int label) {
  const Shape s{1, 1, stack.frames, stack.coeffs};
  if (features.empty()) {
    sample_shape = s;
  } else if (s != sample_shape) {
    throw ShapeError("feature set: sample shape " + s.str() + " differs from " + sample_shape.str());
  }
  features.push_back(stack.values);
  labels.push_back(label);
}

Tensor FeatureSet::batch(std::span<const std::size_t> indices) const {
  const std::size_t per = sample_shape.c * sample_shape.h * sample_shape.w;
  Tensor out(Shape{indices.size(), sample_shape.c, sample_shape.h, sample_shape.w});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& f = features.at(indices[i]);
    std::copy(f.begin(), f.end(), out.raw() + i * per);
  }
  return out;
}

FeatureSet& FeatureSplits::split(Split s) {
  return s == Split::kTrain ? train : s == Split::kVal ? val : test;
}

const FeatureSet& FeatureSplits::split(Split s) const {
  return s == Split::kTrain ? train : s == Split::kVal ? val : test;
}

FeatureSplits featurize_manifest(const SampleManifest& manifest, const FrontendConfig& cfg,
                                 std::optional<NoiseMixing> noise) {
  MfccExtractor extract(cfg);
  std::vector<AudioClip> noises;
  std::optional<Rng> noise_rng;
  if (noise) {
    const fs::path dir = fs::path(manifest.root) / kBackgroundNoiseDir;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
      for (const auto& name : sorted_wavs(dir)) noises.push_back(read_wav((dir / name).string()));
    }
    noise_rng.emplace(noise->seed);
  }
  FeatureSplits out;
  out.labels = manifest.labels;
  for (const auto& e : manifest.entries) {
    AudioClip clip = read_wav((fs::path(manifest.root) / e.path).string());
    if (static_cast<double>(clip.sample_rate) != cfg.sample_rate) {
      throw InvalidArgument(e.path + ": sample rate " + std::to_string(clip.sample_rate) +
                            " Hz, expected " + std::to_string(static_cast<int>(cfg.sample_rate)) +
                            " Hz (resampling is not supported)");
    }
    if (noise_rng && e.split == Split::kTrain && !noises.empty() &&
        noise_rng->uniform01() < noise->probability) {
      const auto& n = noises[noise_rng->below(noises.size())];
      clip = mix_background(clip, n, noise->snr_db, *noise_rng);
    }
    out.split(e.split).add(extract(clip.samples), e.label);
  }
  return out;
}

FeatureSplits featurize_clips(std::span<const LabeledClip> clips, std::vector<std::string> labels,
                              const FrontendConfig& cfg) {
  MfccExtractor extract(cfg);
  FeatureSplits out;
  out.labels = std::move(labels);
  for (const auto& c : clips) out.split(c.split).add(extract(c.clip.samples), c.label);
  return out;
}

}  // namespace tinykws
