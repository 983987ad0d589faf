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

#include "tinykws/model.hpp"

namespace tinykws {

// Model file layout, all integers little-endian:
//   "TSPN" | u16 version | u32 header length | header JSON | blob | u32 CRC32
// The header is canonical JSON {"config": ..., "tensors": [...]} where each
// tensor entry carries name, kind (param|buffer), shape, dtype, offset and
// length into the blob. dtype "int8" records are
//   f64 scale | f64 min | i32 zero_point | int8 codes
// and additionally carry "bits". The CRC covers every preceding byte.
inline constexpr std::uint16_t kModelFormatVersion = 1;

// f64 keeps full training precision; f32 is the compact deployment encoding.
enum class BlobEncoding { kF64, kF32 };

std::vector<std::uint8_t> serialize_model(const Model& model,
                                          BlobEncoding encoding = BlobEncoding::kF64);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::string& path,
                BlobEncoding encoding = BlobEncoding::kF64);
Model load_model(const std::string& path);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace tinykws
