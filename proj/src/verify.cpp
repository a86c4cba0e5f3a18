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

#include "hpd/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "hpd/harness/pipeline.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/masks.hpp"

namespace hpd::verify {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kOracleKmax = 5;

class Suite {
 public:
  explicit Suite(std::string name) : start_(Clock::now()) { result_.name = std::move(name); }

  void fail(const std::string& what) {
    if (result_.passed) result_.detail = what;
    result_.passed = false;
  }
  void count() { ++result_.cases; }
  bool ok() const { return result_.passed; }
  void note(const std::string& what) {
    if (result_.passed) result_.detail = what;
  }

  SuiteResult finish() {
    result_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return result_;
  }

 private:
  SuiteResult result_;
  Clock::time_point start_;
};

std::string slot_diff(std::size_t seed, std::size_t slot, const ValueSlot& a, const ValueSlot& b) {
  std::ostringstream os;
  os << "seed " << seed << " slot " << slot << ": '" << detokenize(a.emitted) << "' (" << to_string(a.state)
     << ") vs '" << detokenize(b.emitted) << "' (" << to_string(b.state) << ")";
  return os.str();
}

bool same_slots(const std::vector<ValueSlot>& a, const std::vector<ValueSlot>& b, std::size_t seed, Suite& suite) {
  if (a.size() != b.size()) {
    suite.fail("seed " + std::to_string(seed) + ": slot counts differ");
    return false;
  }
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].emitted != b[s].emitted || a[s].state != b[s].state) {
      suite.fail(slot_diff(seed, s, a[s], b[s]));
      return false;
    }
  }
  return true;
}

DecodeConfig oracle_decode_config(std::size_t k_max = kOracleKmax) {
  DecodeConfig c;
  c.k_max = k_max;
  c.docs_per_prompt = 3;
  return c;
}

Logits forward_fresh(const Model& model, const TokenSeq& tokens, const std::vector<PositionId>& positions) {
  const std::vector<std::uint8_t> live(tokens.size(), 1);
  KvCache cache = model.make_cache();
  return model.forward(tokens, positions, inference_mask(positions, positions, live, live), cache);
}

}  // namespace

ModelConfig random_model_config(std::uint64_t seed) {
  ModelConfig c = toy_config(seed);
  c.delim_bias = 3.0f;
  return c;
}

WorkedExample worked_example(std::size_t k_max) {
  OutputTemplate t;
  t.prompt = "{documents}";
  t.attribute = "";
  t.document = "{text}";
  t.object_open = "{\n";
  t.row = "{attribute}:{value}\n";
  t.object_close = "}\n";
  WorkedExample ex;
  ex.prompt = make_stacked_prompt("", {{"tv", "tv", "Bravia 4K"}}, {"tv", {"A", "B", "C"}}, k_max, t);
  ex.script.set("tv", "A", "Son");
  ex.script.set("tv", "B", "55i");
  ex.script.set("tv", "C", "UHD");
  return ex;
}

double relative_diff(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) return INFINITY;
  double diff = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::fabs(static_cast<double>(a[i]) - b[i]));
    scale = std::max(scale, std::fabs(static_cast<double>(a[i])));
  }
  return diff / scale;
}

SuiteResult cache_consistency(std::size_t cases, std::uint64_t seed) {
  Suite suite("cache_consistency");
  const DecodeConfig config = oracle_decode_config();
  std::size_t values = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    const auto c = harness::random_layout_case(s, 6, 3, config.k_max, 5);
    const auto hpd = hpd_decode(DecodeBackend::tiny(model), {c.prompt}, config);
    const auto oracle = oracle_full_recompute(model, c.prompt, config);
    suite.count();
    values += oracle.size();
    if (!same_slots(hpd.slots[0], oracle, s, suite)) break;
  }
  suite.note(std::to_string(values) + " values matched");
  return suite.finish();
}

SuiteResult degeneracy(std::size_t cases, std::uint64_t seed) {
  Suite suite("degeneracy");
  const DecodeConfig config = oracle_decode_config(8);
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    const auto c = harness::random_layout_case(s, 1, 1, config.k_max, 5);
    const auto backend = DecodeBackend::tiny(model);
    const auto hpd = hpd_decode(backend, {c.prompt}, config);
    const TokenSeq ar = ar_value(backend, c.prompt, 0, config);
    suite.count();
    if (hpd.slots[0][0].emitted != ar) {
      suite.fail("seed " + std::to_string(s) + ": hpd '" + detokenize(hpd.slots[0][0].emitted) + "' vs ar '" +
                 detokenize(ar) + "'");
      break;
    }
  }
  return suite.finish();
}

SuiteResult first_step_independence(std::size_t cases, std::uint64_t seed, double tolerance) {
  Suite suite("first_step_independence");
  double worst = 0.0;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    auto c = harness::random_layout_case(s, 6, 3, kOracleKmax, 5);
    const auto base = hpd_prefill_logits(model, c.prompt);
    std::mt19937_64 rng(s);
    const auto& slots = c.prompt.layout.slots;
    for (std::size_t n = 0; n + 1 < slots.size(); ++n) {
      StackedPrompt changed = c.prompt;
      for (std::size_t m = n + 1; m < slots.size(); ++m) {
        for (std::size_t t = slots[m].key.begin; t < slots[m].key.end; ++t) {
          changed.layout.tokens[t] = static_cast<TokenId>('a' + (changed.layout.tokens[t] - 'a' + 1 + rng() % 25) % 26);
        }
      }
      const auto rows = hpd_prefill_logits(model, changed);
      worst = std::max(worst, relative_diff(base[n], rows[n]));
    }
    suite.count();
    if (worst > tolerance) {
      suite.fail("seed " + std::to_string(s) + ": relative difference " + std::to_string(worst));
      break;
    }
  }
  std::ostringstream os;
  os << "worst relative difference " << worst;
  suite.note(os.str());
  return suite.finish();
}

SuiteResult mask_equivalence(std::size_t cases, std::uint64_t seed) {
  Suite suite("mask_equivalence");
  const WorkedExample ex = worked_example(7);
  const auto& layout = ex.prompt.layout;
  std::vector<PositionId> anchors;
  std::vector<PositionId> first_values;
  for (const auto& slot : make_slots(layout, ex.prompt.plan)) {
    anchors.push_back(slot.anchor_position);
    first_values.push_back(slot_position(slot, 1, ex.prompt.plan));
  }
  if (anchors != std::vector<PositionId>{12, 22, 32} || first_values != std::vector<PositionId>{13, 23, 33}) {
    suite.fail("worked example positions are off");
  }
  std::vector<TokenSeq> gold;
  for (const auto& slot : layout.slots) {
    gold.push_back(tokenize(*ex.script.find(layout.doc_ids[slot.doc_index], layout.attributes[slot.attr_index])));
  }
  const auto report = mask_equivalence_check(layout, ex.prompt.plan, gold);
  suite.count();
  if (!report.equal) suite.fail("worked example: " + report.summary());

  std::size_t pairs = report.pairs_checked;
  for (std::size_t i = 0; i + 1 < cases && suite.ok(); ++i) {
    const std::uint64_t s = seed + i;
    const std::size_t k_max = 5 + s % 3;
    const auto c = harness::random_layout_case(s, 6, 3, k_max, 5);
    const auto r = mask_equivalence_check(c.prompt.layout, c.prompt.plan, c.gold);
    suite.count();
    pairs += r.pairs_checked;
    if (!r.equal) suite.fail("seed " + std::to_string(s) + ": " + r.summary());
  }
  suite.note(std::to_string(pairs) + " query/key pairs compared");
  return suite.finish();
}

SuiteResult pass_arithmetic(std::size_t cases, std::uint64_t seed) {
  Suite suite("pass_arithmetic");
  {
    const WorkedExample ex = worked_example(7);
    DecodeConfig config = oracle_decode_config(7);
    const auto res = hpd_decode(DecodeBackend::scripted(ex.script), {ex.prompt}, config);
    suite.count();
    if (res.trace.steps_excluding_delimiter != 3 || res.trace.forward_passes != 4 ||
        res.trace.tokens_emitted_per_pass.front() != 3) {
      suite.fail("worked example: " + std::to_string(res.trace.steps_excluding_delimiter) + " value steps, " +
                 std::to_string(res.trace.forward_passes) + " passes");
    }
  }
  {
    harness::SynthOptions so;
    so.seed = seed + 1;
    so.categories = 1;
    so.products = 24;
    so.attrs_per_category = 16;
    const auto corpus = harness::synth_corpus(so);
    harness::RunOptions ro;
    ro.config.docs_per_prompt = 6;
    ro.config.batch_size = 4;
    const auto batches = harness::plan_batches(corpus.records, corpus.attribute_sets, ro);
    const auto res = hpd_decode(DecodeBackend::scripted(corpus.script), batches.front(), ro.config);
    std::size_t longest = 0;
    for (const auto& r : corpus.records) {
      for (const auto& [attr, value] : *r.labels) longest = std::max(longest, value ? value->size() : 0);
    }
    suite.count();
    if (res.trace.tokens_emitted_per_pass.front() != 4 * 6 * 16) suite.fail("first pass width is not b*J*N");
    if (res.trace.forward_passes != longest + 1) suite.fail("scripted passes differ from longest value + 1");
  }
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    const auto c = harness::random_layout_case(s, 6, 3, kOracleKmax, 5);
    const auto res = hpd_decode(DecodeBackend::tiny(model), {c.prompt}, oracle_decode_config());
    suite.count();
    if (res.trace.forward_passes > kOracleKmax + 1) suite.fail("seed " + std::to_string(s) + ": pass bound broken");
    if (res.trace.tokens_emitted_per_pass.front() != c.prompt.layout.slots.size()) {
      suite.fail("seed " + std::to_string(s) + ": first pass width differs from slot count");
    }
  }
  return suite.finish();
}

SuiteResult batch_isolation(std::size_t groups, std::uint64_t seed) {
  Suite suite("batch_isolation");
  const DecodeConfig config = oracle_decode_config();
  std::size_t step_pads = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::uint64_t s = seed + 100 * g;
    const Model model(random_model_config(s));
    const auto backend = DecodeBackend::tiny(model);
    std::vector<StackedPrompt> prompts;
    for (std::size_t i = 0; i < 4; ++i) prompts.push_back(harness::random_layout_case(s + i, 6, 3, config.k_max, 5).prompt);
    const auto batched = hpd_decode(backend, prompts, config);
    for (std::size_t p = 1; p < batched.trace.pad_tokens_per_pass.size(); ++p) {
      step_pads += batched.trace.pad_tokens_per_pass[p];
    }
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const auto single = hpd_decode(backend, {prompts[i]}, config);
      if (!same_slots(batched.slots[i], single.slots[0], s + i, suite)) break;
    }
    suite.count();
    if (!suite.ok()) break;
  }
  if (step_pads == 0) suite.fail("no padding happened after prefill; the batches were not ragged");
  suite.note(std::to_string(step_pads) + " pad tokens in decode steps");
  return suite.finish();
}

SuiteResult rope_shift(std::size_t cases, std::uint64_t seed, double tolerance) {
  Suite suite("rope_shift");
  double worst = 0.0;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    const auto c = harness::random_layout_case(s, 6, 3, kOracleKmax, 5);
    const auto& pos = c.prompt.plan.position_ids;
    std::vector<PositionId> shifted(pos);
    for (auto& p : shifted) p += 100;
    const Logits a = forward_fresh(model, c.prompt.layout.tokens, pos);
    const Logits b = forward_fresh(model, c.prompt.layout.tokens, shifted);
    for (std::size_t r = 0; r < a.rows; ++r) worst = std::max(worst, relative_diff(a.row(r), b.row(r)));
    suite.count();
    if (worst > tolerance) {
      suite.fail("seed " + std::to_string(s) + ": relative difference " + std::to_string(worst));
      break;
    }
  }
  std::ostringstream os;
  os << "worst relative difference " << worst;
  suite.note(os.str());
  return suite.finish();
}

SuiteResult kv_chunking(std::size_t cases, std::uint64_t seed, double tolerance) {
  Suite suite("kv_chunking");
  double worst = 0.0;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + i;
    const Model model(random_model_config(s));
    const auto c = harness::random_layout_case(s, 6, 3, kOracleKmax, 5);
    const auto& tokens = c.prompt.layout.tokens;
    const auto& pos = c.prompt.plan.position_ids;
    const Logits whole = forward_fresh(model, tokens, pos);

    std::mt19937_64 rng(s);
    const std::size_t split = 1 + rng() % (tokens.size() - 1);
    const TokenSeq head(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(split));
    const TokenSeq tail(tokens.begin() + static_cast<std::ptrdiff_t>(split), tokens.end());
    const std::vector<PositionId> head_pos(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(split));
    const std::vector<PositionId> tail_pos(pos.begin() + static_cast<std::ptrdiff_t>(split), pos.end());
    KvCache cache = model.make_cache();
    const std::vector<std::uint8_t> head_live(head.size(), 1);
    model.forward(head, head_pos, inference_mask(head_pos, head_pos, head_live, head_live), cache);
    const std::vector<std::uint8_t> tail_live(tail.size(), 1);
    const Logits rest = model.forward(tail, tail_pos, step_mask(cache, tail_pos, tail_live), cache);
    for (std::size_t r = 0; r < rest.rows; ++r) {
      worst = std::max(worst, relative_diff(whole.row(split + r), rest.row(r)));
    }
    suite.count();
    if (worst > tolerance) {
      suite.fail("seed " + std::to_string(s) + ": relative difference " + std::to_string(worst));
      break;
    }
  }
  std::ostringstream os;
  os << "worst relative difference " << worst;
  suite.note(os.str());
  return suite.finish();
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  return {
      cache_consistency(50, seed),
      degeneracy(20, seed),
      first_step_independence(20, seed, 1e-5),
      mask_equivalence(100, seed),
      pass_arithmetic(20, seed),
      batch_isolation(5, seed),
      rope_shift(20, seed, 1e-4),
      kv_chunking(20, seed, 1e-5),
  };
}

}  // namespace hpd::verify
