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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hpd/harness/metrics.hpp"
#include "hpd/harness/pipeline.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/verify.hpp"

using namespace hpd;
using namespace hpd::harness;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome from_suite(const verify::SuiteResult& r) {
  std::ostringstream os;
  os << r.cases << " cases, " << r.seconds << " s";
  if (!r.detail.empty()) os << ", " << r.detail;
  return {r.passed, os.str()};
}

Outcome both(const verify::SuiteResult& a, const verify::SuiteResult& b) {
  const Outcome x = from_suite(a), y = from_suite(b);
  return {x.passed && y.passed, a.name + ": " + x.detail + "; " + b.name + ": " + y.detail};
}

Outcome cache_consistency() {
  const auto r = verify::cache_consistency(50, 0);
  Outcome o = from_suite(r);
  if (r.seconds >= 60.0) {
    o.passed = false;
    o.detail += " (over 60 s)";
  }
  return o;
}

RunOptions run_options(Mode mode, std::size_t j, std::size_t b) {
  RunOptions ro;
  ro.mode = mode;
  ro.config.k_max = 30;
  ro.config.docs_per_prompt = j;
  ro.config.batch_size = b;
  return ro;
}

Outcome pass_savings() {
  SynthOptions so;
  so.seed = 6;
  so.categories = 1;
  so.products = 48;
  so.attrs_per_category = 16;
  const auto corpus = synth_corpus(so);
  double value_bytes = 0.0;
  std::size_t values = 0;
  for (const auto& r : corpus.records)
    for (const auto& [attr, v] : *r.labels) {
      value_bytes += static_cast<double>(v->size());
      ++values;
    }

  const auto scripted = DecodeBackend::scripted(corpus.script);
  const auto ar = run_extraction(corpus.records, corpus.attribute_sets, scripted, run_options(Mode::ar, 6, 4));
  const auto hpd = run_extraction(corpus.records, corpus.attribute_sets, scripted, run_options(Mode::hpd, 6, 4));
  const double ratio = static_cast<double>(ar.trace.forward_passes) / static_cast<double>(hpd.trace.forward_passes);

  // Same decode loops with the tiny model running every forward, for timing only.
  const Model model(toy_config(6));
  const auto timed = DecodeBackend::scripted(corpus.script, &model);
  const auto ar_t = run_extraction(corpus.records, corpus.attribute_sets, timed, run_options(Mode::ar, 1, 4));
  std::ostringstream os;
  os.precision(3);
  os << "N=16 J=6 b=4 mean value " << value_bytes / static_cast<double>(values) << " bytes; passes AR "
     << ar.trace.forward_passes << " / HPD " << hpd.trace.forward_passes << " = " << ratio
     << "x; tiny-model wall clock vs AR J=1 (" << ar_t.products_per_second() << " products/s):";
  for (std::size_t j : {1, 2, 4, 6}) {
    const auto h = run_extraction(corpus.records, corpus.attribute_sets, timed, run_options(Mode::hpd, j, 4));
    os << " J=" << j << " " << h.products_per_second() / ar_t.products_per_second() << "x";
  }
  return {ratio >= 10.0, os.str()};
}

Outcome metrics() {
  std::mt19937_64 rng(8);
  std::size_t checked = 0;
  std::string failure;
  for (int i = 0; i < 1000 && failure.empty(); ++i) {
    auto draw = [&]() -> std::uint64_t { return rng() % 4 == 0 ? 0 : rng() % 1000; };
    const JudgeCounts c{draw(), draw(), draw(), draw(), draw()};
    const auto r = judge_f1(c);
    // Integer form: F1 = 2G / (2G + H + M + 2I) with G = C + CN.
    const std::uint64_t g = c.correct + c.correct_null;
    const std::uint64_t p_den = g + c.hallucination + c.incorrect;
    const std::uint64_t r_den = g + c.missing + c.incorrect;
    const bool degenerate = g == 0 || p_den == 0 || r_den == 0;
    const double p = p_den ? static_cast<double>(g) / static_cast<double>(p_den) : 0.0;
    const double rc = r_den ? static_cast<double>(g) / static_cast<double>(r_den) : 0.0;
    const std::uint64_t f_den = 2 * g + c.hallucination + c.missing + 2 * c.incorrect;
    const double f = g ? static_cast<double>(2 * g) / static_cast<double>(f_den) : 0.0;
    ++checked;
    if (r.degenerate != degenerate || r.precision != p || r.recall != rc || std::fabs(r.f1 - f) > 1e-15 * std::max(1.0, f)) {
      failure = "vector " + std::to_string(i) + " disagrees";
    }
  }
  const double cost = cost_per_1k(1.17, 30.13, 8);
  std::ostringstream os;
  os << checked << " count vectors; cost_per_1k(1.17, 30.13, 8) = " << cost;
  if (!failure.empty()) os << "; " << failure;
  return {failure.empty() && cost >= 0.885 && cost <= 0.905, os.str()};
}

Outcome end_to_end() {
  std::ostringstream os;
  bool ok = true;
  for (double absent : {0.0, 0.2}) {
    SynthOptions so;
    so.seed = 10;
    so.categories = 3;
    so.products = 60;
    so.attrs_per_category = 10;
    so.absent_fraction = absent;
    const auto corpus = synth_corpus(so);
    const auto gold = gold_labels(corpus.records);
    for (Mode mode : {Mode::hpd, Mode::ar}) {
      const auto out = run_extraction(corpus.records, corpus.attribute_sets, DecodeBackend::scripted(corpus.script),
                                      run_options(mode, 6, 2));
      const auto r = exact_f1(out.parsed.values, gold);
      ok = ok && r.precision == 1.0 && r.recall == 1.0 && r.f1 == 1.0 && out.parsed.warnings == 0;
      os << to_string(mode) << " absent=" << absent << " P=" << r.precision << " R=" << r.recall << " F1=" << r.f1
         << "; ";
    }
  }
  // Control: a script that fills absent attributes must lose precision.
  SynthOptions so;
  so.seed = 10;
  so.products = 60;
  so.absent_fraction = 0.2;
  so.null_aware = false;
  const auto corpus = synth_corpus(so);
  const auto out = run_extraction(corpus.records, corpus.attribute_sets, DecodeBackend::scripted(corpus.script),
                                  run_options(Mode::hpd, 6, 2));
  const auto r = exact_f1(out.parsed.values, gold_labels(corpus.records));
  ok = ok && r.precision < 1.0;
  os << "hallucinating control P=" << r.precision;
  return {ok, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"cache consistency", cache_consistency},
      {"degeneracy", [] { return from_suite(verify::degeneracy(20, 0)); }},
      {"first-step independence", [] { return from_suite(verify::first_step_independence(20, 0, 1e-5)); }},
      {"mask equivalence", [] { return from_suite(verify::mask_equivalence(100, 0)); }},
      {"pass arithmetic", [] { return from_suite(verify::pass_arithmetic(20, 0)); }},
      {"pass savings", pass_savings},
      {"batch isolation", [] { return from_suite(verify::batch_isolation(5, 0)); }},
      {"metrics", metrics},
      {"rope shift / kv chunking",
       [] { return both(verify::rope_shift(20, 0, 1e-4), verify::kv_chunking(20, 0, 1e-5)); }},
      {"end-to-end", end_to_end},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %-26s %s\n", o.passed ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
