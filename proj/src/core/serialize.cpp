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

#include "tinykws/serialize.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "config_json.hpp"
#include "json.hpp"
#include "tinykws/error.hpp"

namespace tinykws {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'T', 'S', 'P', 'N'};
constexpr std::size_t kPreamble = 4 + 2 + 4;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

std::uint64_t read_le(std::span<const std::uint8_t> b, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

[[noreturn]] void bad(FormatError::Kind kind, const std::string& what) {
  throw FormatError(kind, "model file: " + what);
}

struct Entry {
  std::string name;
  std::string kind;
  Shape shape;
  std::string dtype;
  std::size_t offset = 0;
  std::size_t length = 0;
  int bits = 0;
};

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t done = 0;
  while (done < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - done, 1u << 30);
    crc = ::crc32(crc, bytes.data() + done, static_cast<uInt>(chunk));
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize_model(const Model& model, BlobEncoding encoding) {
  Writer blob;
  json tensors = json::array();
  auto emit = [&](const ConstParamRef& ref, const char* kind) {
    const Tensor& t = *ref.tensor;
    const Shape& s = t.shape();
    json e{{"name", ref.name}, {"kind", kind}, {"shape", {s.n, s.c, s.h, s.w}},
           {"offset", blob.size()}};
    const auto q = model.quantized().find(ref.name);
    if (q != model.quantized().end()) {
      const QuantizedTensor& qt = q->second;
      blob.f64(qt.scale);
      blob.f64(qt.min);
      blob.u32(static_cast<std::uint32_t>(qt.zero_point));
      blob.bytes(qt.q.data(), qt.q.size());
      e["dtype"] = "int8";
      e["bits"] = qt.bits;
    } else if (encoding == BlobEncoding::kF32) {
      for (double v : t.data()) blob.f32(static_cast<float>(v));
      e["dtype"] = "f32";
    } else {
      for (double v : t.data()) blob.f64(v);
      e["dtype"] = "f64";
    }
    e["length"] = blob.size() - e["offset"].get<std::size_t>();
    tensors.push_back(std::move(e));
  };
  for (const auto& p : model.parameters()) emit(p, "param");
  for (const auto& b : model.buffers()) emit(b, "buffer");

  json header{{"config", detail::config_to_value(model.config())}, {"tensors", std::move(tensors)}};
  const std::string header_text = header.dump();

  Writer out;
  out.bytes(kMagic, 4);
  out.u16(kModelFormatVersion);
  out.u32(static_cast<std::uint32_t>(header_text.size()));
  out.bytes(header_text.data(), header_text.size());
  out.bytes(blob.buffer().data(), blob.size());
  out.u32(crc32(out.buffer()));
  return std::move(out.buffer());
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    bad(FormatError::Kind::kBadMagic, "missing TSPN magic");
  }
  if (bytes.size() < kPreamble + 4) bad(FormatError::Kind::kTruncated, "file too short");
  const auto version = static_cast<std::uint16_t>(read_le(bytes, 4, 2));
  if (version != kModelFormatVersion) {
    bad(FormatError::Kind::kVersion, "unsupported format version " + std::to_string(version) +
                                         " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::size_t header_len = read_le(bytes, 6, 4);
  if (kPreamble + header_len + 4 > bytes.size()) {
    bad(FormatError::Kind::kTruncated, "header extends past end of file");
  }
  const std::size_t body_end = bytes.size() - 4;
  const std::uint32_t stored = static_cast<std::uint32_t>(read_le(bytes, body_end, 4));
  if (crc32(bytes.first(body_end)) != stored) bad(FormatError::Kind::kChecksum, "CRC32 mismatch");

  json header;
  try {
    header = json::parse(bytes.begin() + kPreamble, bytes.begin() + kPreamble + header_len);
  } catch (const json::exception& e) {
    bad(FormatError::Kind::kHeader, std::string("header is not valid JSON: ") + e.what());
  }
  const auto blob = bytes.subspan(kPreamble + header_len, body_end - kPreamble - header_len);

  ModelConfig config;
  std::vector<Entry> entries;
  try {
    config = detail::config_from_value(header.at("config"));
    for (const auto& e : header.at("tensors")) {
      Entry en;
      en.name = e.at("name").get<std::string>();
      en.kind = e.at("kind").get<std::string>();
      const auto& s = e.at("shape");
      en.shape = Shape{s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                       s.at(2).get<std::size_t>(), s.at(3).get<std::size_t>()};
      en.dtype = e.at("dtype").get<std::string>();
      en.offset = e.at("offset").get<std::size_t>();
      en.length = e.at("length").get<std::size_t>();
      if (en.dtype == "int8") en.bits = e.at("bits").get<int>();
      entries.push_back(std::move(en));
    }
  } catch (const json::exception& e) {
    bad(FormatError::Kind::kHeader, std::string("malformed header: ") + e.what());
  } catch (const InvalidArgument& e) {
    bad(FormatError::Kind::kHeader, std::string("invalid config in header: ") + e.what());
  }

  Model model = Model::build(config, 0);
  std::map<std::string, QuantizedTensor> quantized;
  std::set<std::string> seen;
  for (const Entry& en : entries) {
    Tensor* target = model.find(en.name);
    if (target == nullptr) bad(FormatError::Kind::kHeader, "unknown tensor " + en.name);
    if (!seen.insert(en.name).second) bad(FormatError::Kind::kHeader, "duplicate tensor " + en.name);
    if (target->shape() != en.shape) {
      bad(FormatError::Kind::kHeader, "tensor " + en.name + " has shape " + en.shape.str() +
                                          ", config implies " + target->shape().str());
    }
    if (en.offset > blob.size() || en.length > blob.size() - en.offset) {
      bad(FormatError::Kind::kTruncated, "tensor " + en.name + " extends past the blob");
    }
    const auto data = blob.subspan(en.offset, en.length);
    const std::size_t n = target->size();
    if (en.dtype == "f64" || en.dtype == "f32") {
      const std::size_t width = en.dtype == "f64" ? 8 : 4;
      if (en.length != n * width) bad(FormatError::Kind::kHeader, "bad length for " + en.name);
      for (std::size_t i = 0; i < n; ++i) {
        (*target)[i] = width == 8
                           ? std::bit_cast<double>(read_le(data, i * 8, 8))
                           : static_cast<double>(std::bit_cast<float>(
                                 static_cast<std::uint32_t>(read_le(data, i * 4, 4))));
      }
    } else if (en.dtype == "int8") {
      if (en.length != 20 + n) bad(FormatError::Kind::kHeader, "bad length for " + en.name);
      if (en.bits != 4 && en.bits != 8) bad(FormatError::Kind::kHeader, "bad bit width");
      QuantizedTensor qt;
      qt.bits = en.bits;
      qt.shape = en.shape;
      qt.scale = std::bit_cast<double>(read_le(data, 0, 8));
      qt.min = std::bit_cast<double>(read_le(data, 8, 8));
      qt.zero_point = static_cast<std::int32_t>(static_cast<std::uint32_t>(read_le(data, 16, 4)));
      qt.q.resize(n);
      std::memcpy(qt.q.data(), data.data() + 20, n);
      *target = dequantize(qt);
      quantized.emplace(en.name, std::move(qt));
    } else {
      bad(FormatError::Kind::kUnsupported, "unknown dtype " + en.dtype);
    }
  }
  const std::size_t expected = model.parameters().size() + model.buffers().size();
  if (seen.size() != expected) bad(FormatError::Kind::kHeader, "tensor manifest is incomplete");
  if (!quantized.empty()) model.set_quantized(std::move(quantized), config.weight_bits);
  return model;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path);
}

void save_model(const Model& model, const std::string& path, BlobEncoding encoding) {
  write_file(path, serialize_model(model, encoding));
}

Model load_model(const std::string& path) { return deserialize_model(read_file(path)); }

}  // namespace tinykws
