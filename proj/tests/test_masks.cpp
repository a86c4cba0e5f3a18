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

#include "gen.hpp"
#include "hpd/errors.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/masks.hpp"
#include "hpd/verify.hpp"

namespace hpd {
namespace {

std::vector<TokenSeq> worked_gold(const verify::WorkedExample& ex) {
  std::vector<TokenSeq> gold;
  const auto& l = ex.prompt.layout;
  for (const auto& s : l.slots) gold.push_back(tokenize(*ex.script.find(l.doc_ids[s.doc_index], l.attributes[s.attr_index])));
  return gold;
}

TEST(InferenceMask, MatchesDefinitionOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    test::Gen g(seed);
    const std::size_t nq = 1 + g.below(8), nk = 1 + g.below(12);
    std::vector<PositionId> qp(nq), kp(nk);
    std::vector<std::uint8_t> kl(nk), ql(nq);
    for (auto& p : qp) p = static_cast<PositionId>(g.below(20));
    for (auto& p : kp) p = static_cast<PositionId>(g.below(20));
    for (auto& l : kl) l = g.below(4) != 0;
    for (auto& l : ql) l = g.below(4) != 0;
    const auto m = inference_mask(qp, kp, kl, ql);
    for (std::size_t q = 0; q < nq; ++q)
      for (std::size_t k = 0; k < nk; ++k)
        ASSERT_EQ(m.allowed(q, k), ql[q] && kl[k] && kp[k] <= qp[q]) << "seed " << seed;
  }
}

TEST(InferenceMask, EmptyQueryLiveMeansAllLive) {
  const std::vector<PositionId> p{0, 1};
  const std::vector<std::uint8_t> live{1, 1};
  EXPECT_EQ(inference_mask(p, p, live), causal_mask(2));
}

TEST(InferenceMask, IsNotTriangularAfterOutOfOrderAppends) {
  // Memory order: prompt tokens at 0, 10, then a value token at 1.
  const std::vector<PositionId> p{0, 10, 1};
  const std::vector<std::uint8_t> live{1, 1, 1};
  const auto m = inference_mask(p, p, live);
  EXPECT_TRUE(m.allowed(1, 2));
  EXPECT_FALSE(m.allowed(2, 1));
}

TEST(ReplayMask, AddsMemoryOrder) {
  const std::vector<PositionId> p{0, 10, 1};
  const std::vector<std::uint8_t> live{1, 1, 1};
  const auto m = replay_mask(p, live);
  EXPECT_FALSE(m.allowed(1, 2));
  EXPECT_TRUE(m.allowed(2, 0));
  EXPECT_FALSE(m.allowed(2, 1));
}

TEST(TrainingSequence, InsertsValuesIntoGaps) {
  const auto ex = verify::worked_example(7);
  const auto seq = build_training_sequence(ex.prompt.layout, ex.prompt.plan, worked_gold(ex));
  EXPECT_EQ(seq.tokens.size(), ex.prompt.layout.tokens.size() + 9);
  // "Son" follows the first anchor at positions 13..15.
  EXPECT_EQ(seq.tokens[13], 'S');
  EXPECT_EQ(seq.positions[13], 13);
  EXPECT_EQ(seq.positions[15], 15);
  EXPECT_EQ(seq.slot[14], 0);
  EXPECT_EQ(seq.value_index[14], 2u);
  EXPECT_EQ(seq.slot[16], -1);
  EXPECT_EQ(seq.positions[16], 20);
}

TEST(TrainingSequence, RejectsBadGold) {
  const auto ex = verify::worked_example(3);
  auto gold = worked_gold(ex);
  gold.pop_back();
  EXPECT_THROW(build_training_sequence(ex.prompt.layout, ex.prompt.plan, gold), ContractError);
  gold = worked_gold(ex);
  gold[0] = tokenize("toolong");
  EXPECT_THROW(build_training_sequence(ex.prompt.layout, ex.prompt.plan, gold), ContractError);
}

// Straight from the rule: position causal, minus later-slot value tokens
// reading deeper tokens of earlier slots, minus non-value queries reading values.
AttentionMask reference_training_mask(const TrainingSequence& s) {
  const std::size_t n = s.tokens.size();
  AttentionMask m(n, n);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      bool ok = s.positions[k] <= s.positions[q];
      const bool qv = s.slot[q] >= 0, kv = s.slot[k] >= 0;
      if (qv && kv && s.slot[k] < s.slot[q] && s.value_index[k] > s.value_index[q]) ok = false;
      if (!qv && kv) ok = false;
      m.set(q, k, ok);
    }
  }
  return m;
}

TEST(TrainingMask, MatchesIndependentRule) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = harness::random_layout_case(seed, 4, 3, 5, 5);
    const auto seq = build_training_sequence(c.prompt.layout, c.prompt.plan, c.gold);
    ASSERT_EQ(training_mask(c.prompt.layout, c.prompt.plan, c.gold), reference_training_mask(seq)) << "seed " << seed;
  }
}

TEST(TrainingMask, WorkedExampleEntries) {
  const auto ex = verify::worked_example(7);
  const auto seq = build_training_sequence(ex.prompt.layout, ex.prompt.plan, worked_gold(ex));
  const auto m = training_mask(ex.prompt.layout, ex.prompt.plan, worked_gold(ex));
  auto index_of = [&](int slot, std::size_t k) {
    for (std::size_t i = 0; i < seq.tokens.size(); ++i)
      if (seq.slot[i] == slot && seq.value_index[i] == k) return i;
    return seq.tokens.size();
  };
  const std::size_t c1 = index_of(2, 1), a1 = index_of(0, 1), a2 = index_of(0, 2), b1 = index_of(1, 1);
  EXPECT_TRUE(m.allowed(c1, a1));
  EXPECT_FALSE(m.allowed(c1, a2));
  EXPECT_TRUE(m.allowed(c1, b1));
  EXPECT_TRUE(m.allowed(index_of(2, 3), a2));
  // The row after the first value is structure and cannot read the value.
  EXPECT_FALSE(m.allowed(index_of(0, 3) + 1, a1));
}

TEST(MaskEquivalence, HoldsOnRandomLayouts) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t k_max = 3 + seed % 4;
    const auto c = harness::random_layout_case(seed, 5, 3, k_max, k_max);
    const auto r = mask_equivalence_check(c.prompt.layout, c.prompt.plan, c.gold);
    EXPECT_TRUE(r.equal) << "seed " << seed << ": " << r.summary();
    EXPECT_GT(r.pairs_checked, 0u);
  }
}

TEST(MaskEquivalence, DetectsACorruptedPair) {
  const auto ex = verify::worked_example(7);
  const auto gold = worked_gold(ex);
  const auto seq = build_training_sequence(ex.prompt.layout, ex.prompt.plan, gold);
  auto mask = training_mask(ex.prompt.layout, ex.prompt.plan, gold);
  std::size_t c2 = 0, a1 = 0;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.slot[i] == 2 && seq.value_index[i] == 2) c2 = i;
    if (seq.slot[i] == 0 && seq.value_index[i] == 1) a1 = i;
  }
  mask.set(c2, a1, false);
  const auto r = compare_with_training_mask(ex.prompt.layout, ex.prompt.plan, gold, mask);
  ASSERT_FALSE(r.equal);
  ASSERT_EQ(r.diffs.size(), 1u);
  EXPECT_EQ(r.diffs[0].query, c2);
  EXPECT_EQ(r.diffs[0].key, a1);
  EXPECT_TRUE(r.diffs[0].inference_allowed);
}

TEST(MaskEquivalence, PlainCausalMaskIsNotEquivalent) {
  const auto ex = verify::worked_example(7);
  const auto gold = worked_gold(ex);
  const std::size_t n = build_training_sequence(ex.prompt.layout, ex.prompt.plan, gold).tokens.size();
  EXPECT_FALSE(compare_with_training_mask(ex.prompt.layout, ex.prompt.plan, gold, causal_mask(n)).equal);
}

TEST(Pbm, WritesHeaderAndRows) {
  EXPECT_EQ(to_pbm(causal_mask(2)), "P1\n2 2\n1 0\n1 1\n");
}

}  // namespace
}  // namespace hpd
