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

#include "hpd/harness/metrics.hpp"

#include "hpd/errors.hpp"

namespace hpd::harness {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

void finish(MetricsReport& r, double p_num, double p_den, double r_num, double r_den) {
  r.degenerate = p_den == 0.0 || r_den == 0.0;
  r.precision = p_den == 0.0 ? 0.0 : p_num / p_den;
  r.recall = r_den == 0.0 ? 0.0 : r_num / r_den;
  const double sum = r.precision + r.recall;
  r.f1 = sum == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / sum;
}

JudgeCounts counts_from(const json& j) {
  JudgeCounts c;
  auto get = [&](const char* key) -> std::uint64_t {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("judge counts: missing '") + key + "'", 0);
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw ParseError(std::string("judge counts: '") + key + "' must be a non-negative integer", 0);
    }
    return it->get<std::uint64_t>();
  };
  c.correct = get("C");
  c.correct_null = get("CN");
  c.incorrect = get("I");
  c.missing = get("M");
  c.hallucination = get("H");
  return c;
}

}  // namespace

std::string normalize_value(std::string_view v) {
  std::string out;
  bool pending_space = false;
  for (char ch : v) {
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
  }
  return out;
}

MetricsReport exact_f1(const ValueTable& predictions, const ValueTable& labels) {
  MetricsReport r;
  require<ContractError>(predictions.size() == labels.size(), "exact_f1: prediction and label documents differ");
  for (const auto& [doc, gold_row] : labels) {
    auto pit = predictions.find(doc);
    require<ContractError>(pit != predictions.end(), "exact_f1: no predictions for document '" + doc + "'");
    require<ContractError>(pit->second.size() == gold_row.size(),
                           "exact_f1: attribute sets differ for document '" + doc + "'");
    for (const auto& [attr, gold] : gold_row) {
      auto vit = pit->second.find(attr);
      require<ContractError>(vit != pit->second.end(),
                             "exact_f1: no prediction for '" + doc + "'/'" + attr + "'");
      const auto& pred = vit->second;
      if (!pred && !gold) {
        ++r.both_null;
      } else if (pred && !gold) {
        ++r.false_positives;
      } else if (!pred && gold) {
        ++r.false_negatives;
      } else if (normalize_value(*pred) == normalize_value(*gold)) {
        ++r.true_positives;
      } else {
        ++r.false_positives;
        ++r.false_negatives;
      }
    }
  }
  const auto tp = static_cast<double>(r.true_positives);
  finish(r, tp, tp + static_cast<double>(r.false_positives), tp, tp + static_cast<double>(r.false_negatives));
  return r;
}

MetricsReport judge_f1(const JudgeCounts& c) {
  MetricsReport r;
  const auto good = static_cast<double>(c.correct + c.correct_null);
  finish(r, good, good + static_cast<double>(c.hallucination + c.incorrect), good,
         good + static_cast<double>(c.missing + c.incorrect));
  if (good == 0.0) r.degenerate = true;
  return r;
}

std::vector<std::pair<std::string, JudgeCounts>> parse_judge_counts(const json& j) {
  if (!j.is_object()) throw ParseError("judge counts must be a JSON object", 0);
  std::vector<std::pair<std::string, JudgeCounts>> out;
  if (j.contains("C")) {
    out.emplace_back("run", counts_from(j));
    return out;
  }
  for (const auto& [name, value] : j.items()) {
    if (!value.is_object()) throw ParseError("judge counts for '" + name + "' must be an object", 0);
    out.emplace_back(name, counts_from(value));
  }
  return out;
}

std::vector<std::pair<std::string, JudgeCounts>> load_judge_counts(const std::string& path) {
  try {
    return parse_judge_counts(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

double cost_per_1k(double products_per_second_per_gpu, double hourly_rate, std::size_t num_gpus) {
  require<ContractError>(products_per_second_per_gpu > 0.0, "cost_per_1k: rate must be > 0");
  require<ContractError>(num_gpus >= 1, "cost_per_1k: num_gpus must be >= 1");
  require<ContractError>(hourly_rate >= 0.0, "cost_per_1k: hourly rate must be >= 0");
  return (hourly_rate / static_cast<double>(num_gpus)) / (3600.0 * products_per_second_per_gpu) * 1000.0;
}

double rate_for_cost(double cost, double hourly_rate, std::size_t num_gpus) {
  require<ContractError>(cost > 0.0, "rate_for_cost: cost must be > 0");
  require<ContractError>(num_gpus >= 1, "rate_for_cost: num_gpus must be >= 1");
  require<ContractError>(hourly_rate > 0.0, "rate_for_cost: hourly rate must be > 0");
  return (hourly_rate / static_cast<double>(num_gpus)) * 1000.0 / (3600.0 * cost);
}

}  // namespace hpd::harness
