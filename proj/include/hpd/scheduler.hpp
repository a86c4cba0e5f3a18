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
#include <span>
#include <string>
#include <vector>

#include "hpd/kv_cache.hpp"
#include "hpd/output_template.hpp"
#include "hpd/tokenizer.hpp"

namespace hpd {

struct Document {
  std::string id;
  std::string category;
  std::string text;
};

/// Ordered attribute names of one category; order defines the slot index.
struct AttributeSet {
  std::string category;
  std::vector<std::string> attributes;
};

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// One value field in the skeleton.
struct SlotRef {
  std::size_t doc_index = 0;
  std::size_t attr_index = 0;
  /// Token index of the last token before the value field.
  std::size_t anchor = 0;
  /// Attribute name tokens inside this row of the skeleton.
  TokenSpan key;
};

/// Prompt followed by the skeleton output: the model input for parallel decoding.
struct SkeletonLayout {
  TokenSeq tokens;
  std::vector<SlotRef> slots;  // ordered by (doc, attr); anchors strictly increasing
  std::vector<TokenSpan> structure_spans;
  std::size_t prompt_length = 0;  // tokens before the first skeleton object
  std::vector<std::string> doc_ids;
  std::vector<std::string> attributes;
  OutputTemplate format;

  std::size_t num_docs() const { return doc_ids.size(); }
  std::size_t num_attributes() const { return attributes.size(); }
  TokenSeq prompt_tokens() const { return {tokens.begin(), tokens.begin() + prompt_length}; }
};

/// Logical position ids for a layout, with a gap of k_max after every anchor.
struct PositionPlan {
  std::vector<PositionId> position_ids;
  std::size_t k_max = 0;
};

enum class SlotState { active, pruned, truncated };

const char* to_string(SlotState s);

/// Lifecycle of one (document, attribute) value being decoded.
struct ValueSlot {
  std::size_t doc_index = 0;
  std::size_t attr_index = 0;
  std::size_t anchor = 0;
  PositionId anchor_position = 0;
  SlotState state = SlotState::active;
  TokenSeq emitted;  // value tokens, DELIM excluded
  PositionId next_position = 0;

  bool active() const { return state == SlotState::active; }
};

/// J documents of one category sharing a single instruction/attribute header.
struct StackedPrompt {
  SkeletonLayout layout;
  PositionPlan plan;
  std::size_t docs_per_prompt = 1;
};

SkeletonLayout build_skeleton(const std::string& instruction, const std::vector<Document>& docs,
                              const AttributeSet& attrs, const OutputTemplate& format = {});

/// Initial ids 0..|s|-1; every token after slot i's anchor gets an extra k_max,
/// accumulated over slots. Structure tokens between a value field and the next
/// attribute therefore move with the next slot.
PositionPlan assign_position_ids(const SkeletonLayout& layout, std::size_t k_max);

StackedPrompt make_stacked_prompt(const std::string& instruction, const std::vector<Document>& docs,
                                  const AttributeSet& attrs, std::size_t k_max,
                                  const OutputTemplate& format = {});

/// Fresh active slots, one per layout slot.
std::vector<ValueSlot> make_slots(const SkeletonLayout& layout, const PositionPlan& plan);

/// Position of the k-th value token (1-based) of `slot`.
PositionId slot_position(const ValueSlot& slot, std::size_t k, const PositionPlan& plan);

struct AdvanceResult {
  std::vector<std::size_t> left;  // slot indices that became inactive this step
};

/// Consumes one sampled token per active slot, in slot order. DELIM prunes
/// the slot without storing the token; reaching k_max tokens truncates it.
AdvanceResult advance(std::vector<ValueSlot>& slots, std::span<const TokenId> sampled, std::size_t k_max);

std::size_t count_active(const std::vector<ValueSlot>& slots);

struct BatchRow {
  TokenSeq tokens;
  std::vector<PositionId> positions;
};

/// Rows right-padded with PAD to the widest row. Pad entries get position 0
/// and are never attended to.
struct PaddedBatch {
  std::size_t width = 0;
  std::vector<BatchRow> rows;
  std::vector<std::vector<std::uint8_t>> live;
  std::vector<std::size_t> pad_counts;
};

PaddedBatch pad_batch(const std::vector<BatchRow>& rows);

}  // namespace hpd
