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
#include <string>
#include <vector>

#include "hpd/harness/dataset.hpp"
#include "hpd/scheduler.hpp"
#include "hpd/scripted.hpp"

namespace hpd::harness {

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t categories = 2;
  std::size_t products = 24;
  std::size_t attrs_per_category = 12;
  /// Probability that a product lacks an attribute (gold label null).
  double absent_fraction = 0.0;
  /// Absent attributes are scripted as `null`; otherwise the script plants a
  /// plausible wrong value there, like a model that hallucinates.
  bool null_aware = true;
};

struct SynthCorpus {
  std::vector<DatasetRecord> records;
  std::vector<AttributeSet> attribute_sets;
  ScriptTable script;
  std::string instruction;
};

/// Value bytes average 4 (uniform 2..6) and never exceed 6.
SynthCorpus synth_corpus(const SynthOptions& options);

std::string default_instruction();

/// Random small layout for oracle tests: 1..max_attrs attributes, 1..max_docs
/// documents, short texts, plus gold values of 0..max_value_len letters
/// (also planted in `script`).
struct LayoutCase {
  StackedPrompt prompt;
  std::vector<TokenSeq> gold;
  ScriptTable script;
};

LayoutCase random_layout_case(std::uint64_t seed, std::size_t max_attrs, std::size_t max_docs, std::size_t k_max,
                              std::size_t max_value_len);

}  // namespace hpd::harness
