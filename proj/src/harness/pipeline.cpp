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

#include "hpd/harness/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "hpd/errors.hpp"

namespace hpd::harness {

const char* to_string(Mode m) { return m == Mode::ar ? "ar" : "hpd"; }

Mode parse_mode(const std::string& s) {
  if (s == "ar") return Mode::ar;
  if (s == "hpd") return Mode::hpd;
  throw ConfigError("unknown mode '" + s + "' (expected ar or hpd)");
}

std::vector<std::vector<StackedPrompt>> plan_batches(const std::vector<DatasetRecord>& records,
                                                     const std::vector<AttributeSet>& sets,
                                                     const RunOptions& options) {
  options.config.validate();
  validate_records(records, sets);
  std::vector<std::string> categories;
  for (const auto& r : records) {
    if (std::find(categories.begin(), categories.end(), r.category) == categories.end()) {
      categories.push_back(r.category);
    }
  }

  const std::size_t j_docs = options.config.docs_per_prompt;
  const std::size_t b = options.config.batch_size;
  std::vector<std::vector<StackedPrompt>> batches;
  for (const auto& category : categories) {
    const AttributeSet& set = find_attribute_set(sets, category);
    std::vector<Document> docs;
    std::vector<StackedPrompt> batch;
    auto flush_docs = [&]() {
      if (docs.empty()) return;
      batch.push_back(make_stacked_prompt(options.instruction, docs, set, options.config.k_max, options.format));
      docs.clear();
      if (batch.size() == b) {
        batches.push_back(std::move(batch));
        batch.clear();
      }
    };
    for (const auto& r : records) {
      if (r.category != category) continue;
      docs.push_back(r.document());
      if (docs.size() == j_docs) flush_docs();
    }
    flush_docs();
    if (!batch.empty()) batches.push_back(std::move(batch));
  }
  return batches;
}

double RunOutput::products_per_second() const {
  return trace.wall_clock_s > 0.0 ? static_cast<double>(products) / trace.wall_clock_s : 0.0;
}

RunOutput run_extraction(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets,
                         const DecodeBackend& backend, const RunOptions& options) {
  RunOutput out;
  const auto batches = plan_batches(records, sets, options);
  for (const auto& batch : batches) {
    out.prompts += batch.size();
    for (const auto& p : batch) out.products += p.layout.num_docs();
    if (options.mode == Mode::hpd) {
      const HpdDecodeResult res = hpd_decode(backend, batch, options.config);
      for (const auto& r : res.results) merge_parsed(out.parsed, parse_hpd_output(r));
      out.trace.append(res.trace);
    } else {
      const ArDecodeResult res = ar_decode(backend, batch, options.config);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        ParsedOutput part = parse_ar_output(detokenize(res.outputs[i].tokens), batch[i].layout);
        if (!res.outputs[i].finished) {
          ++part.warnings;
          part.messages.push_back("output budget exhausted before the last object closed");
        }
        merge_parsed(out.parsed, std::move(part));
      }
      out.trace.append(res.trace);
    }
  }
  return out;
}

json trace_to_json(const DecodeTrace& trace) {
  json j;
  j["forward_passes"] = trace.forward_passes;
  j["steps_excluding_delimiter"] = trace.steps_excluding_delimiter;
  j["tokens_emitted"] = trace.total_emitted();
  j["tokens_emitted_per_pass"] = trace.tokens_emitted_per_pass;
  j["query_tokens_per_pass"] = trace.query_tokens_per_pass;
  j["pad_tokens_per_pass"] = trace.pad_tokens_per_pass;
  j["wall_clock_s"] = trace.wall_clock_s;
  j["peak_cache_entries"] = trace.peak_cache_entries;
  return j;
}

ScriptTable script_from_labels(const std::vector<DatasetRecord>& records) {
  return script_from_values(gold_labels(records));
}

ScriptTable script_from_values(const ValueTable& values) {
  ScriptTable script;
  for (const auto& [doc, row] : values) {
    for (const auto& [attr, value] : row) script.set(doc, attr, value ? *value : std::string("null"));
  }
  return script;
}

std::vector<BenchRow> bench_sweep(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets,
                                  const DecodeBackend& backend, const BenchOptions& options) {
  require<ContractError>(!options.docs.empty() && !options.batches.empty(), "bench: empty sweep");
  auto run = [&](std::size_t j, std::size_t b, Mode mode) {
    RunOptions ro;
    ro.mode = mode;
    ro.config = options.config;
    ro.config.docs_per_prompt = j;
    ro.config.batch_size = b;
    ro.instruction = options.instruction;
    ro.format = options.format;
    const RunOutput out = run_extraction(records, sets, backend, ro);
    BenchRow row;
    row.j = j;
    row.b = b;
    row.mode = mode;
    row.products_per_s = out.products_per_second();
    row.forward_passes = out.trace.forward_passes;
    row.tokens = out.trace.total_emitted();
    return row;
  };

  const std::size_t max_b = *std::max_element(options.batches.begin(), options.batches.end());
  BenchRow baseline = run(1, max_b, Mode::ar);
  baseline.speedup = 1.0;

  std::vector<BenchRow> rows{baseline};
  for (std::size_t j : options.docs) {
    for (std::size_t b : options.batches) {
      for (Mode mode : options.modes) {
        if (mode == Mode::ar && j == 1 && b == max_b) continue;
        BenchRow row = run(j, b, mode);
        row.speedup = row.forward_passes == 0
                          ? 0.0
                          : static_cast<double>(baseline.forward_passes) / static_cast<double>(row.forward_passes);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "j,b,mode,products_per_s,forward_passes,tokens,speedup\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%.3f,%zu,%zu,%.4f\n", r.j, r.b, to_string(r.mode), r.products_per_s,
                  r.forward_passes, r.tokens, r.speedup);
    out += buf;
  }
  return out;
}

}  // namespace hpd::harness
