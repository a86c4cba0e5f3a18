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

#include "hpd/scheduler.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hpd/errors.hpp"

namespace hpd {

namespace {

// Single-pass placeholder substitution; inserted text is never rescanned.
std::string fill(std::string_view tmpl, const std::map<std::string_view, std::string_view>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    bool matched = false;
    if (tmpl[pos] == '{') {
      for (const auto& [name, value] : vars) {
        if (tmpl.substr(pos, name.size()) == name) {
          out += value;
          pos += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += tmpl[pos++];
  }
  return out;
}

void append_text(SkeletonLayout& layout, std::string_view text, bool structure) {
  if (text.empty()) return;
  const std::size_t begin = layout.tokens.size();
  const TokenSeq toks = tokenize(text);
  layout.tokens.insert(layout.tokens.end(), toks.begin(), toks.end());
  if (structure) layout.structure_spans.push_back({begin, layout.tokens.size()});
}

}  // namespace

const char* to_string(SlotState s) {
  switch (s) {
    case SlotState::active:
      return "active";
    case SlotState::pruned:
      return "pruned";
    case SlotState::truncated:
      return "truncated";
  }
  return "?";
}

SkeletonLayout build_skeleton(const std::string& instruction, const std::vector<Document>& docs,
                              const AttributeSet& attrs, const OutputTemplate& format) {
  require<ContractError>(!docs.empty(), "build_skeleton: at least one document is required");
  require<ContractError>(!attrs.attributes.empty(), "build_skeleton: attribute list is empty");
  std::set<std::string> seen;
  for (const auto& a : attrs.attributes) {
    require<ContractError>(!a.empty(), "build_skeleton: empty attribute name");
    require<ContractError>(seen.insert(a).second, "build_skeleton: duplicate attribute '" + a + "'");
  }
  for (const auto& d : docs) {
    require<ContractError>(!d.id.empty(), "build_skeleton: document without id");
    require<ContractError>(!d.text.empty(), "build_skeleton: document '" + d.id + "' has empty text");
    require<ContractError>(d.category == attrs.category, "build_skeleton: document '" + d.id + "' has category '" +
                                                             d.category + "', attribute set is for '" +
                                                             attrs.category + "'");
  }
  format.validate();

  SkeletonLayout layout;
  layout.format = format;
  layout.attributes = attrs.attributes;

  std::string attributes_text;
  for (const auto& a : attrs.attributes) attributes_text += fill(format.attribute, {{"{attribute}", a}});
  std::string documents_text;
  for (const auto& d : docs) {
    documents_text += fill(format.document, {{"{id}", d.id}, {"{text}", d.text}});
    layout.doc_ids.push_back(d.id);
  }
  const std::string prompt = fill(format.prompt, {{"{instruction}", instruction},
                                                  {"{attributes}", attributes_text},
                                                  {"{documents}", documents_text}});
  append_text(layout, prompt, false);
  layout.prompt_length = layout.tokens.size();

  const std::string opener = format.key_opener();
  const std::string separator = format.key_separator();
  const std::string suffix = format.row_suffix();
  for (std::size_t j = 0; j < docs.size(); ++j) {
    append_text(layout, fill(format.object_open, {{"{id}", docs[j].id}}), true);
    for (std::size_t n = 0; n < attrs.attributes.size(); ++n) {
      const std::string& name = attrs.attributes[n];
      append_text(layout, opener, true);
      SlotRef slot{j, n, 0, {}};
      slot.key.begin = layout.tokens.size();
      append_text(layout, name, false);
      slot.key.end = layout.tokens.size();
      append_text(layout, separator, true);
      slot.anchor = layout.tokens.size() - 1;
      layout.slots.push_back(slot);
      append_text(layout, suffix, true);
    }
    append_text(layout, fill(format.object_close, {{"{id}", docs[j].id}}), true);
  }
  return layout;
}

PositionPlan assign_position_ids(const SkeletonLayout& layout, std::size_t k_max) {
  require<ContractError>(k_max >= 1, "assign_position_ids: k_max must be >= 1");
  PositionPlan plan;
  plan.k_max = k_max;
  plan.position_ids.resize(layout.tokens.size());
  std::size_t offset = 0;
  std::size_t next_slot = 0;
  for (std::size_t t = 0; t < layout.tokens.size(); ++t) {
    plan.position_ids[t] = static_cast<PositionId>(t + offset);
    if (next_slot < layout.slots.size() && layout.slots[next_slot].anchor == t) {
      offset += k_max;
      ++next_slot;
    }
  }
  require<ContractError>(next_slot == layout.slots.size(), "assign_position_ids: slot anchors are not increasing");
  return plan;
}

StackedPrompt make_stacked_prompt(const std::string& instruction, const std::vector<Document>& docs,
                                  const AttributeSet& attrs, std::size_t k_max, const OutputTemplate& format) {
  StackedPrompt p;
  p.layout = build_skeleton(instruction, docs, attrs, format);
  p.plan = assign_position_ids(p.layout, k_max);
  p.docs_per_prompt = docs.size();
  return p;
}

std::vector<ValueSlot> make_slots(const SkeletonLayout& layout, const PositionPlan& plan) {
  require<ContractError>(plan.position_ids.size() == layout.tokens.size(), "make_slots: plan does not match layout");
  std::vector<ValueSlot> slots;
  slots.reserve(layout.slots.size());
  for (const auto& ref : layout.slots) {
    ValueSlot s;
    s.doc_index = ref.doc_index;
    s.attr_index = ref.attr_index;
    s.anchor = ref.anchor;
    s.anchor_position = plan.position_ids[ref.anchor];
    s.next_position = s.anchor_position + 1;
    slots.push_back(std::move(s));
  }
  return slots;
}

PositionId slot_position(const ValueSlot& slot, std::size_t k, const PositionPlan& plan) {
  require<ContractError>(k >= 1, "slot_position: k must be >= 1");
  require<CapacityError>(k <= plan.k_max, "slot_position: k=" + std::to_string(k) + " exceeds k_max=" +
                                              std::to_string(plan.k_max));
  require<ContractError>(slot.anchor < plan.position_ids.size(), "slot_position: anchor outside plan");
  return plan.position_ids[slot.anchor] + static_cast<PositionId>(k);
}

std::size_t count_active(const std::vector<ValueSlot>& slots) {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const ValueSlot& s) { return s.active(); }));
}

AdvanceResult advance(std::vector<ValueSlot>& slots, std::span<const TokenId> sampled, std::size_t k_max) {
  const std::size_t active = count_active(slots);
  require<ContractError>(sampled.size() == active, "advance: got " + std::to_string(sampled.size()) +
                                                       " tokens for " + std::to_string(active) + " active slots");
  AdvanceResult result;
  std::size_t next = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    ValueSlot& s = slots[i];
    if (!s.active()) continue;
    const TokenId tok = sampled[next++];
    if (tok == tokens::kDelim) {
      s.state = SlotState::pruned;
      result.left.push_back(i);
      continue;
    }
    s.emitted.push_back(tok);
    s.next_position = s.anchor_position + static_cast<PositionId>(s.emitted.size()) + 1;
    if (s.emitted.size() >= k_max) {
      s.state = SlotState::truncated;
      result.left.push_back(i);
    }
  }
  return result;
}

PaddedBatch pad_batch(const std::vector<BatchRow>& rows) {
  PaddedBatch batch;
  for (const auto& r : rows) {
    require<ContractError>(r.tokens.size() == r.positions.size(), "pad_batch: token/position count mismatch");
    batch.width = std::max(batch.width, r.tokens.size());
  }
  for (const auto& r : rows) {
    BatchRow padded = r;
    std::vector<std::uint8_t> live(batch.width, 0);
    std::fill(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(r.tokens.size()), 1);
    const std::size_t pads = batch.width - r.tokens.size();
    padded.tokens.resize(batch.width, tokens::kPad);
    padded.positions.resize(batch.width, 0);
    batch.rows.push_back(std::move(padded));
    batch.live.push_back(std::move(live));
    batch.pad_counts.push_back(pads);
  }
  return batch;
}

}  // namespace hpd
