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
#include <string>
#include <vector>

#include "hpd/engine.hpp"
#include "hpd/harness/dataset.hpp"
#include "hpd/harness/parse.hpp"
#include "hpd/harness/synth.hpp"

namespace hpd::harness {

enum class Mode { ar, hpd };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

struct RunOptions {
  Mode mode = Mode::hpd;
  DecodeConfig config;
  std::string instruction = default_instruction();
  OutputTemplate format;
};

/// Records grouped by category (first-appearance order), J documents per
/// prompt, b prompts per batch. Batches never mix categories.
std::vector<std::vector<StackedPrompt>> plan_batches(const std::vector<DatasetRecord>& records,
                                                     const std::vector<AttributeSet>& sets,
                                                     const RunOptions& options);

struct RunOutput {
  ParsedOutput parsed;
  DecodeTrace trace;
  std::size_t products = 0;
  std::size_t prompts = 0;

  double products_per_second() const;
};

RunOutput run_extraction(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets,
                         const DecodeBackend& backend, const RunOptions& options);

json trace_to_json(const DecodeTrace& trace);

/// Plants every gold label (null as `null`) for the scripted backend.
ScriptTable script_from_labels(const std::vector<DatasetRecord>& records);
ScriptTable script_from_values(const ValueTable& values);

struct BenchOptions {
  std::vector<std::size_t> docs{1, 2, 4, 6, 8};
  std::vector<std::size_t> batches{1, 2, 4};
  std::vector<Mode> modes{Mode::ar, Mode::hpd};
  DecodeConfig config;  // k_max, sampling, seed; J and b come from the sweep
  std::string instruction = default_instruction();
  OutputTemplate format;
};

struct BenchRow {
  std::size_t j = 1;
  std::size_t b = 1;
  Mode mode = Mode::hpd;
  double products_per_s = 0.0;  // wall clock around the decode loops
  std::size_t forward_passes = 0;
  std::size_t tokens = 0;
  /// Forward passes of the AR baseline (J=1, largest b) over this row's passes.
  double speedup = 0.0;
};

/// Runs the AR baseline first, then every (J, b, mode) in sweep order.
std::vector<BenchRow> bench_sweep(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets,
                                  const DecodeBackend& backend, const BenchOptions& options);

/// Header `j,b,mode,products_per_s,forward_passes,tokens,speedup`.
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace hpd::harness
