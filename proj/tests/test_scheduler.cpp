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

#include "hpd/errors.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/scheduler.hpp"
#include "hpd/verify.hpp"

namespace hpd {
namespace {

TEST(Skeleton, WorkedExampleAnchorsAndGaps) {
  const auto ex = verify::worked_example(7);
  const auto& layout = ex.prompt.layout;
  ASSERT_EQ(layout.slots.size(), 3u);
  EXPECT_EQ(layout.slots[0].anchor, 12u);
  EXPECT_EQ(layout.slots[1].anchor, 15u);
  EXPECT_EQ(layout.slots[2].anchor, 18u);
  const auto slots = make_slots(layout, ex.prompt.plan);
  EXPECT_EQ(slots[0].anchor_position, 12);
  EXPECT_EQ(slots[1].anchor_position, 22);
  EXPECT_EQ(slots[2].anchor_position, 32);
  EXPECT_EQ(slot_position(slots[0], 1, ex.prompt.plan), 13);
  EXPECT_EQ(slot_position(slots[1], 1, ex.prompt.plan), 23);
  EXPECT_EQ(slot_position(slots[2], 1, ex.prompt.plan), 33);
  EXPECT_EQ(slot_position(slots[2], 7, ex.prompt.plan), 39);
  EXPECT_THROW(slot_position(slots[2], 8, ex.prompt.plan), CapacityError);
}

TEST(Skeleton, KeySpansHoldAttributeNames) {
  const auto c = harness::random_layout_case(11, 5, 3, 6, 4);
  const auto& layout = c.prompt.layout;
  for (const auto& s : layout.slots) {
    const TokenSeq key(layout.tokens.begin() + s.key.begin, layout.tokens.begin() + s.key.end);
    EXPECT_EQ(detokenize(key), layout.attributes[s.attr_index]);
  }
}

TEST(Skeleton, SlotsAreDocMajor) {
  const auto c = harness::random_layout_case(12, 4, 3, 6, 4);
  const auto& layout = c.prompt.layout;
  ASSERT_EQ(layout.slots.size(), layout.num_docs() * layout.num_attributes());
  for (std::size_t i = 0; i < layout.slots.size(); ++i) {
    EXPECT_EQ(layout.slots[i].doc_index, i / layout.num_attributes());
    EXPECT_EQ(layout.slots[i].attr_index, i % layout.num_attributes());
    if (i > 0) EXPECT_GT(layout.slots[i].anchor, layout.slots[i - 1].anchor);
  }
}

// Independent recount: id = token index + k_max * (anchors strictly before it).
TEST(Positions, MatchAnchorCountFormula) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t k_max = 1 + seed % 9;
    const auto c = harness::random_layout_case(seed, 6, 4, k_max, 0);
    const auto& layout = c.prompt.layout;
    const auto& pos = c.prompt.plan.position_ids;
    ASSERT_EQ(pos.size(), layout.tokens.size());
    for (std::size_t t = 0; t < pos.size(); ++t) {
      std::size_t before = 0;
      for (const auto& s : layout.slots) before += s.anchor < t ? 1 : 0;
      ASSERT_EQ(pos[t], static_cast<PositionId>(t + k_max * before)) << "seed " << seed << " token " << t;
    }
    for (const auto& s : layout.slots) {
      if (s.anchor + 1 < pos.size()) EXPECT_EQ(pos[s.anchor + 1] - pos[s.anchor], static_cast<PositionId>(k_max + 1));
    }
  }
}

TEST(Positions, GapsNeverCollideWithLaterTokens) {
  const auto c = harness::random_layout_case(5, 6, 4, 7, 0);
  const auto& plan = c.prompt.plan;
  const auto slots = make_slots(c.prompt.layout, plan);
  for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
    EXPECT_LT(slot_position(slots[i], plan.k_max, plan), plan.position_ids[slots[i].anchor + 1]);
  }
}

TEST(Skeleton, RejectsBadInput) {
  const AttributeSet attrs{"c", {"a", "b"}};
  EXPECT_THROW(build_skeleton("x", {}, attrs), ContractError);
  EXPECT_THROW(build_skeleton("x", {{"d", "c", "t"}}, {"c", {"a", "a"}}), ContractError);
  EXPECT_THROW(build_skeleton("x", {{"d", "other", "t"}}, attrs), ContractError);
  EXPECT_THROW(build_skeleton("x", {{"d", "c", ""}}, attrs), ContractError);
  EXPECT_THROW(build_skeleton("x", {{"d", "c", "t"}}, {"c", {}}), ContractError);
  EXPECT_THROW(make_stacked_prompt("x", {{"d", "c", "t"}}, attrs, 0), ContractError);
}

TEST(Advance, DelimPrunesAndKmaxTruncates) {
  const auto c = harness::random_layout_case(3, 1, 3, 2, 0);
  auto slots = make_slots(c.prompt.layout, c.prompt.plan);
  const std::size_t n = slots.size();
  std::vector<TokenId> first(n, 'a');
  first[0] = tokens::kDelim;
  auto r = advance(slots, first, 2);
  EXPECT_EQ(r.left, std::vector<std::size_t>{0});
  EXPECT_EQ(slots[0].state, SlotState::pruned);
  EXPECT_TRUE(slots[0].emitted.empty());
  EXPECT_EQ(count_active(slots), n - 1);

  r = advance(slots, std::vector<TokenId>(n - 1, 'b'), 2);
  EXPECT_EQ(r.left.size(), n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    EXPECT_EQ(slots[i].state, SlotState::truncated);
    EXPECT_EQ(slots[i].emitted, (TokenSeq{'a', 'b'}));
  }
  EXPECT_THROW(advance(slots, std::vector<TokenId>{'x'}, 2), ContractError);
}

TEST(PadBatch, RightPadsWithDeadEntries) {
  const auto b = pad_batch({{{'a', 'b', 'c'}, {0, 5, 9}}, {{'d'}, {3}}});
  EXPECT_EQ(b.width, 3u);
  EXPECT_EQ(b.rows[1].tokens, (TokenSeq{'d', tokens::kPad, tokens::kPad}));
  EXPECT_EQ(b.live[1], (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(b.pad_counts, (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(pad_batch({{{'a'}, {}}}), ContractError);
}

}  // namespace
}  // namespace hpd
