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

// Finite-difference gradient checks for every layer primitive and a full
// attention condenser. Each case projects the op's output onto a fixed
// random tensor R, so the scalar loss is <R, op(...)> and the analytic
// gradient comes from running backward on R.

#pragma once

#include <string>
#include <vector>

#include "oracles.hpp"

namespace tinykws::testing {

struct GradCase {
  std::string name;  // "<op>/<wrt>"
  GradCheck check;
};

std::vector<GradCase> primitive_gradient_cases(std::uint64_t seed = 1);
std::vector<GradCase> condenser_gradient_cases(std::uint64_t seed = 2);

}  // namespace tinykws::testing
