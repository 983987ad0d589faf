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

#include "tinykws/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tinykws/error.hpp"
#include "tinykws/serialize.hpp"

namespace tinykws {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

[[noreturn]] void bad_wav(FormatError::Kind kind, const std::string& what) {
  throw FormatError(kind, "wav: " + what);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

AudioClip parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad_wav(FormatError::Kind::kBadMagic, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  AudioClip clip;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::size_t size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const bool is_data = std::memcmp(bytes.data() + pos, "data", 4) == 0;
    const bool is_fmt = std::memcmp(bytes.data() + pos, "fmt ", 4) == 0;
    if (size > bytes.size() - body) {
      bad_wav(FormatError::Kind::kTruncated,
              std::string(is_data ? "data" : "chunk") + " extends past end of file");
    }
    if (is_fmt) {
      if (size < 16) bad_wav(FormatError::Kind::kHeader, "fmt chunk too short");
      std::uint16_t format = le16(bytes, body);
      channels = le16(bytes, body + 2);
      clip.sample_rate = le32(bytes, body + 4);
      bits = le16(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) format = le16(bytes, body + 24);
      if (format != kFormatPcm) {
        bad_wav(FormatError::Kind::kUnsupported, "only PCM is supported (format tag " +
                                                     std::to_string(format) + ")");
      }
      if (channels != 1) {
        bad_wav(FormatError::Kind::kUnsupported,
                "only mono is supported (" + std::to_string(channels) + " channels)");
      }
      if (bits != 16) {
        bad_wav(FormatError::Kind::kUnsupported,
                "only 16-bit samples are supported (" + std::to_string(bits) + " bits)");
      }
      if (clip.sample_rate == 0) bad_wav(FormatError::Kind::kHeader, "zero sample rate");
      have_fmt = true;
    } else if (is_data) {
      if (!have_fmt) bad_wav(FormatError::Kind::kHeader, "data chunk before fmt chunk");
      if (size % 2 != 0) bad_wav(FormatError::Kind::kTruncated, "odd byte count in 16-bit data");
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(le16(bytes, body + 2 * i));
        clip.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  bad_wav(have_fmt ? FormatError::Kind::kTruncated : FormatError::Kind::kHeader,
          have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioClip read_wav(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return parse_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> pcm, std::uint32_t sample_rate) {
  std::vector<std::uint8_t> out;
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, sample_rate);
  put32(out, sample_rate * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (std::int16_t s : pcm) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate) {
  std::vector<std::int16_t> pcm(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = std::round(std::clamp(samples[i], -1.0, 1.0) * 32768.0);
    pcm[i] = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
  }
  return encode_wav(pcm, sample_rate);
}

}  // namespace tinykws
