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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tinykws {

struct AudioClip {
  std::vector<double> samples;  // in [-1, 1)
  std::uint32_t sample_rate = 16000;
};

// RIFF/WAVE, PCM 16-bit, mono. Sample i = int16 / 32768.
AudioClip parse_wav(std::span<const std::uint8_t> bytes);
AudioClip read_wav(const std::string& path);

// 16-bit PCM mono encoder; samples are clamped to [-1, 1] and rounded.
std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> pcm, std::uint32_t sample_rate);
std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate);

}  // namespace tinykws
