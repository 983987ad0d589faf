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

#include <stdexcept>
#include <string>

namespace tinykws {

// Root of every exception thrown by the library. The C API maps each subclass
// onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values or violated preconditions (validation errors).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor shapes that do not line up.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Filesystem failures: missing files, unwritable paths, short reads.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data (model files, WAV files, JSON documents).
class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kVersion, kTruncated, kChecksum, kHeader, kUnsupported };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Numerical failure during training (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace tinykws
