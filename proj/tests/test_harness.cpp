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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "gen.hpp"
#include "hpd/errors.hpp"
#include "hpd/harness/dataset.hpp"
#include "hpd/harness/metrics.hpp"
#include "hpd/harness/parse.hpp"
#include "hpd/harness/pipeline.hpp"
#include "hpd/harness/synth.hpp"

namespace hpd::harness {
namespace {

const char* kSample =
    R"({"id": "a", "category": "tv", "text": "Sony 55", "labels": {"Brand": "Sony", "Size": "55"}, "split": "dev"})"
    "\n\n"
    R"({"id": "b", "category": "tv", "text": "LG", "labels": {"Brand": "LG", "Size": null}})"
    "\n"
    R"({"id": "c", "category": "shoe", "text": "Nike", "labels": {"Color": null}})"
    "\n";

TEST(Jsonl, ParsesRecordsAndSkipsBlankLines) {
  const auto r = parse_jsonl(kSample);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].labels->at(1).first, "Size");
  EXPECT_EQ(r[1].labels->at(1).second, std::nullopt);
  EXPECT_EQ(r[0].extra["split"], "dev");
}

TEST(Jsonl, RoundTripsThroughText) {
  const auto r = parse_jsonl(kSample);
  const auto again = parse_jsonl(to_jsonl(r));
  ASSERT_EQ(again.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(again[i].id, r[i].id);
    EXPECT_EQ(again[i].labels, r[i].labels);
    EXPECT_EQ(again[i].extra, r[i].extra);
  }
}

TEST(Jsonl, ReportsLineOfBadRecord) {
  try {
    parse_jsonl("{\"id\": \"a\", \"category\": \"x\", \"text\": \"t\"}\n{oops\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_jsonl("{\"id\": \"a\", \"text\": \"t\"}\n"), ParseError);
}

TEST(Jsonl, RejectsDuplicateIds) {
  EXPECT_THROW(parse_jsonl("{\"id\":\"a\",\"category\":\"x\",\"text\":\"t\"}\n{\"id\":\"a\",\"category\":\"x\",\"text\":\"u\"}\n"),
               ValidationError);
}

TEST(Dataset, DerivesAttributeSetsInFirstSeenOrder) {
  const auto sets = derive_attribute_sets(parse_jsonl(kSample));
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].category, "tv");
  EXPECT_EQ(sets[0].attributes, (std::vector<std::string>{"Brand", "Size"}));
  EXPECT_EQ(sets[1].attributes, (std::vector<std::string>{"Color"}));
}

TEST(Dataset, ValidationCatchesUnknownLabels) {
  const auto records = parse_jsonl(kSample);
  const std::vector<AttributeSet> sets{{"tv", {"Brand"}}, {"shoe", {"Color"}}};
  EXPECT_THROW(validate_records(records, sets), ValidationError);
  EXPECT_THROW(validate_records(records, {{"tv", {"Brand", "Size"}}}), ValidationError);
}

TEST(Dataset, ResultsFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "hpd_harness_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "results.json").string();
  const ValueTable v{{"a", {{"Brand", "Sony"}, {"Size", std::nullopt}}}};
  save_results(path, v, json{{"forward_passes", 3}});
  EXPECT_EQ(load_results(path), v);
  EXPECT_THROW(load_results((dir / "missing.json").string()), IoError);
}

TEST(Dataset, InvalidUtf8ValuesAreReplacedOnSave) {
  const auto path = (std::filesystem::temp_directory_path() / "hpd_bad_utf8.json").string();
  save_results(path, {{"a", {{"x", std::string("\xb5z")}}}});
  EXPECT_EQ(load_results(path).at("a").at("x"), "\xef\xbf\xbdz");
}

TEST(Synth, IsDeterministicAndShaped) {
  SynthOptions o;
  o.seed = 9;
  o.products = 30;
  o.attrs_per_category = 7;
  const auto a = synth_corpus(o), b = synth_corpus(o);
  EXPECT_EQ(to_jsonl(a.records), to_jsonl(b.records));
  ASSERT_EQ(a.records.size(), 30u);
  for (const auto& r : a.records) {
    ASSERT_EQ(r.labels->size(), 7u);
    for (const auto& [attr, v] : *r.labels) {
      ASSERT_TRUE(v.has_value());
      EXPECT_GE(v->size(), 2u);
      EXPECT_LE(v->size(), 6u);
      EXPECT_NE(r.text.find(*v), std::string::npos);
    }
  }
  EXPECT_NO_THROW(validate_records(a.records, a.attribute_sets));
}

TEST(Synth, AbsentValuesAreNullOrHallucinated) {
  SynthOptions o;
  o.products = 200;
  o.absent_fraction = 0.2;
  const auto aware = synth_corpus(o);
  std::size_t absent = 0, total = 0;
  for (const auto& r : aware.records) {
    for (const auto& [attr, v] : *r.labels) {
      ++total;
      if (!v) {
        ++absent;
        EXPECT_EQ(*aware.script.find(r.id, attr), "null");
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(absent) / static_cast<double>(total), 0.2, 0.03);
  o.null_aware = false;
  const auto wrong = synth_corpus(o);
  for (const auto& r : wrong.records)
    for (const auto& [attr, v] : *r.labels)
      if (!v) EXPECT_NE(*wrong.script.find(r.id, attr), "null");
}

StackedPrompt two_doc_prompt() {
  return make_stacked_prompt("x", {{"a", "tv", "Sony"}, {"b", "tv", "LG"}}, {"tv", {"Brand", "Size"}}, 8);
}

TEST(ParseAr, ReadsRenderedObjects) {
  const auto p = two_doc_prompt();
  ScriptTable s;
  s.set("a", "Brand", "Sony");
  s.set("a", "Size", "\"55 in\"");
  s.set("b", "Brand", "LG");
  const auto out = parse_ar_output(render_expected_output(p.layout, s), p.layout);
  EXPECT_EQ(out.warnings, 0u);
  EXPECT_EQ(out.values.at("a").at("Size"), "55 in");
  EXPECT_EQ(out.values.at("b").at("Size"), std::nullopt);
}

TEST(ParseAr, DropsCutRowsAndFlagsUnknownKeys) {
  const auto p = two_doc_prompt();
  const auto out = parse_ar_output("{\n\"Brand\": Sony\n\"Colour\": red\n\"Size\": 5", p.layout);
  EXPECT_EQ(out.values.at("a").at("Brand"), "Sony");
  EXPECT_EQ(out.values.at("a").at("Size"), std::nullopt);
  EXPECT_EQ(out.values.at("b").at("Brand"), std::nullopt);
  EXPECT_GE(out.warnings, 2u);
}

// Independent tally for exact-match scoring.
struct Tally {
  std::size_t tp = 0, fp = 0, fn = 0;
};

TEST(ExactF1, AgreesWithDirectCounting) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    test::Gen g(seed);
    ValueTable pred, gold;
    Tally t;
    const std::size_t docs = 1 + g.below(5), attrs = 1 + g.below(5);
    const std::vector<std::string> pool{"a", "b", "A ", "c"};
    for (std::size_t d = 0; d < docs; ++d) {
      for (std::size_t a = 0; a < attrs; ++a) {
        std::optional<std::string> gv, pv;
        if (g.below(3)) gv = pool[g.below(pool.size())];
        if (g.below(3)) pv = pool[g.below(pool.size())];
        gold["d" + std::to_string(d)]["x" + std::to_string(a)] = gv;
        pred["d" + std::to_string(d)]["x" + std::to_string(a)] = pv;
        auto norm = [](std::string v) { return v == "A " ? std::string("a") : v; };
        if (pv && gv && norm(*pv) == norm(*gv)) ++t.tp;
        else {
          if (pv) ++t.fp;
          if (gv) ++t.fn;
        }
      }
    }
    const auto r = exact_f1(pred, gold);
    ASSERT_EQ(r.true_positives, t.tp) << "seed " << seed;
    ASSERT_EQ(r.false_positives, t.fp);
    ASSERT_EQ(r.false_negatives, t.fn);
    if (t.tp + t.fp > 0) EXPECT_DOUBLE_EQ(r.precision, static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp));
    if (t.tp + t.fn > 0) EXPECT_DOUBLE_EQ(r.recall, static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn));
  }
}

TEST(ExactF1, KeySetsMustMatch) {
  EXPECT_THROW(exact_f1({{"a", {{"x", "1"}}}}, {{"a", {{"y", "1"}}}}), ContractError);
  EXPECT_THROW(exact_f1({}, {{"a", {{"y", "1"}}}}), ContractError);
}

TEST(JudgeF1, FormulaAndDegenerateCases) {
  const auto r = judge_f1({8, 2, 1, 1, 0});
  EXPECT_DOUBLE_EQ(r.precision, 10.0 / 11.0);
  EXPECT_DOUBLE_EQ(r.recall, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 * (10.0 / 11.0) * (10.0 / 12.0) / (10.0 / 11.0 + 10.0 / 12.0));
  EXPECT_FALSE(r.degenerate);
  EXPECT_TRUE(judge_f1({0, 0, 0, 3, 2}).degenerate);
  EXPECT_TRUE(judge_f1({}).degenerate);
  EXPECT_EQ(judge_f1({}).f1, 0.0);
}

TEST(JudgeF1, CountsFileForms) {
  const auto single = parse_judge_counts(json::parse(R"({"C":1,"CN":2,"I":3,"M":4,"H":5})"));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].second.hallucination, 5u);
  const auto many = parse_judge_counts(json::parse(R"({"x":{"C":1,"CN":0,"I":0,"M":0,"H":0},"y":{"C":2,"CN":0,"I":0,"M":0,"H":0}})"));
  ASSERT_EQ(many.size(), 2u);
  EXPECT_EQ(many[1].first, "y");
  EXPECT_THROW(parse_judge_counts(json::parse(R"({"C":1})")), ParseError);
  EXPECT_THROW(parse_judge_counts(json::parse(R"({"C":-1,"CN":0,"I":0,"M":0,"H":0})")), ParseError);
}

TEST(Cost, MatchesHandComputation) {
  EXPECT_DOUBLE_EQ(cost_per_1k(1.0, 36.0, 1), 10.0);
  EXPECT_NEAR(cost_per_1k(rate_for_cost(0.895, 30.13, 8), 30.13, 8), 0.895, 1e-12);
  EXPECT_THROW(cost_per_1k(0.0, 1.0, 1), ContractError);
  EXPECT_THROW(cost_per_1k(1.0, 1.0, 0), ContractError);
}

TEST(Pipeline, BatchesNeverMixCategories) {
  SynthOptions so;
  so.categories = 3;
  so.products = 25;
  so.attrs_per_category = 3;
  const auto c = synth_corpus(so);
  RunOptions ro;
  ro.config.docs_per_prompt = 2;
  ro.config.batch_size = 3;
  const auto batches = plan_batches(c.records, c.attribute_sets, ro);
  std::size_t docs = 0;
  std::set<std::string> seen;
  for (const auto& b : batches) {
    ASSERT_LE(b.size(), 3u);
    const auto attrs = b.front().layout.attributes;
    for (const auto& p : b) {
      EXPECT_EQ(p.layout.attributes, attrs);
      EXPECT_LE(p.layout.num_docs(), 2u);
      docs += p.layout.num_docs();
      for (const auto& id : p.layout.doc_ids) EXPECT_TRUE(seen.insert(id).second);
    }
  }
  EXPECT_EQ(docs, 25u);
}

TEST(Pipeline, ScriptedRunsReproduceLabels) {
  SynthOptions so;
  so.products = 18;
  so.attrs_per_category = 6;
  so.absent_fraction = 0.25;
  const auto c = synth_corpus(so);
  for (Mode mode : {Mode::hpd, Mode::ar}) {
    RunOptions ro;
    ro.mode = mode;
    ro.config.k_max = 8;
    ro.config.docs_per_prompt = 4;
    ro.config.batch_size = 2;
    const auto out = run_extraction(c.records, c.attribute_sets, DecodeBackend::scripted(c.script), ro);
    EXPECT_EQ(out.parsed.warnings, 0u) << to_string(mode);
    const auto r = exact_f1(out.parsed.values, gold_labels(c.records));
    EXPECT_EQ(r.f1, 1.0) << to_string(mode);
    EXPECT_EQ(out.products, 18u);
  }
}

TEST(Pipeline, ArBudgetShortfallIsAWarning) {
  SynthOptions so;
  so.products = 2;
  const auto c = synth_corpus(so);
  RunOptions ro;
  ro.mode = Mode::ar;
  ro.config.max_new_tokens = 10;
  const auto out = run_extraction(c.records, c.attribute_sets, DecodeBackend::scripted(c.script), ro);
  EXPECT_GT(out.parsed.warnings, 0u);
}

TEST(Bench, BaselineFirstAndSpeedupsArePassRatios) {
  SynthOptions so;
  so.categories = 1;
  so.products = 12;
  so.attrs_per_category = 5;
  const auto c = synth_corpus(so);
  BenchOptions bo;
  bo.docs = {1, 3};
  bo.batches = {1, 2};
  bo.config.k_max = 8;
  const auto rows = bench_sweep(c.records, c.attribute_sets, DecodeBackend::scripted(c.script), bo);
  ASSERT_EQ(rows.size(), 1u + 2 * 2 * 2 - 1);
  EXPECT_EQ(rows[0].mode, Mode::ar);
  EXPECT_EQ(rows[0].j, 1u);
  EXPECT_EQ(rows[0].b, 2u);
  EXPECT_EQ(rows[0].speedup, 1.0);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.speedup, static_cast<double>(rows[0].forward_passes) / static_cast<double>(r.forward_passes));
    if (r.mode == Mode::hpd) EXPECT_GT(r.speedup, 1.0);
  }
  const std::string csv = bench_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "j,b,mode,products_per_s,forward_passes,tokens,speedup");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rows.size() + 1);
}

}  // namespace
}  // namespace hpd::harness
