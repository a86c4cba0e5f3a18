// Copyright 2026 The HPD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpd/engine.hpp"
#include "hpd/model.hpp"
#include "hpd/scheduler.hpp"

namespace hpd::verify {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::string detail;
  double seconds = 0.0;
};

/// Toy config with a DELIM bias that makes random weights stop values at
/// mixed lengths instead of always running into k_max.
ModelConfig random_model_config(std::uint64_t seed);

/// Single document with attributes A, B, C whose anchors sit at token
/// indices 12, 15, 18 (logical 12, 22, 32 at k_max=7). The script plants
/// three-token values.
struct WorkedExample {
  StackedPrompt prompt;
  ScriptTable script;
};
WorkedExample worked_example(std::size_t k_max = 7);

/// max |a - b| / max(1, max |a|).
double relative_diff(std::span<const float> a, std::span<const float> b);

/// Greedy hpd_decode against oracle_full_recompute on random layouts.
SuiteResult cache_consistency(std::size_t cases, std::uint64_t seed);

/// N=1, J=1 HPD against plain AR decoding of the value.
SuiteResult degeneracy(std::size_t cases, std::uint64_t seed);

/// Prefill row of every slot against a layout whose later attribute names
/// were replaced.
SuiteResult first_step_independence(std::size_t cases, std::uint64_t seed, double tolerance);

/// mask_equivalence_check on random layouts plus the worked example.
SuiteResult mask_equivalence(std::size_t cases, std::uint64_t seed);

/// Step counts of the worked example, pass bound and first-pass width.
SuiteResult pass_arithmetic(std::size_t cases, std::uint64_t seed);

/// b=4 against b=1, token for token, with ragged prompts.
SuiteResult batch_isolation(std::size_t groups, std::uint64_t seed);

/// All positions shifted by a constant.
SuiteResult rope_shift(std::size_t cases, std::uint64_t seed, double tolerance);

/// Layout forwarded in two chunks against one chunk.
SuiteResult kv_chunking(std::size_t cases, std::uint64_t seed, double tolerance);

/// Every suite at its default size.
std::vector<SuiteResult> run_all(std::uint64_t seed = 0);

}  // namespace hpd::verify
