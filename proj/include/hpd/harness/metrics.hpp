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
#include <string_view>
#include <utility>
#include <vector>

#include "hpd/harness/dataset.hpp"

namespace hpd::harness {

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// A precision or recall denominator was zero.
  bool degenerate = false;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t both_null = 0;
  double products_per_second = 0.0;
  double cost_per_1k = 0.0;
};

/// Trim, ASCII lowercase, collapse whitespace runs to one space.
std::string normalize_value(std::string_view v);

/// Predicted non-null equal to gold (after normalization) is a true positive.
/// A wrong non-null prediction counts as both a false positive and a false
/// negative. Null/null pairs are left out. Key sets must match exactly.
MetricsReport exact_f1(const ValueTable& predictions, const ValueTable& labels);

struct JudgeCounts {
  std::uint64_t correct = 0;       // C
  std::uint64_t correct_null = 0;  // CN
  std::uint64_t incorrect = 0;     // I
  std::uint64_t missing = 0;       // M
  std::uint64_t hallucination = 0; // H
};

/// P = (C+CN)/(C+CN+H+I), R = (C+CN)/(C+CN+M+I), F1 their harmonic mean.
MetricsReport judge_f1(const JudgeCounts& counts);

/// Reads `{"C":..,"CN":..,"I":..,"M":..,"H":..}` or an object of run name ->
/// such counts.
std::vector<std::pair<std::string, JudgeCounts>> load_judge_counts(const std::string& path);
std::vector<std::pair<std::string, JudgeCounts>> parse_judge_counts(const json& j);

/// (hourly_rate / num_gpus) / (3600 * products_per_second_per_gpu) * 1000.
double cost_per_1k(double products_per_second_per_gpu, double hourly_rate, std::size_t num_gpus);

/// Per-GPU rate that yields `cost` per 1k products.
double rate_for_cost(double cost, double hourly_rate, std::size_t num_gpus);

}  // namespace hpd::harness
