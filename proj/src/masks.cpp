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

#include "hpd/masks.hpp"

#include <sstream>

#include "hpd/errors.hpp"

namespace hpd {

AttentionMask inference_mask(std::span<const PositionId> query_positions, std::span<const PositionId> key_positions,
                             std::span<const std::uint8_t> key_live, std::span<const std::uint8_t> query_live) {
  require<ContractError>(key_live.size() == key_positions.size(), "inference_mask: key_live size mismatch");
  require<ContractError>(query_live.empty() || query_live.size() == query_positions.size(),
                         "inference_mask: query_live size mismatch");
  AttentionMask mask(query_positions.size(), key_positions.size());
  for (std::size_t q = 0; q < query_positions.size(); ++q) {
    if (!query_live.empty() && !query_live[q]) continue;
    for (std::size_t k = 0; k < key_positions.size(); ++k) {
      if (key_live[k] && key_positions[k] <= query_positions[q]) mask.set(q, k, true);
    }
  }
  return mask;
}

AttentionMask step_mask(const KvCache& cache, std::span<const PositionId> new_positions,
                        std::span<const std::uint8_t> new_live) {
  std::vector<PositionId> key_pos(cache.positions().begin(), cache.positions().end());
  key_pos.insert(key_pos.end(), new_positions.begin(), new_positions.end());
  std::vector<std::uint8_t> key_live(cache.live().begin(), cache.live().end());
  key_live.insert(key_live.end(), new_live.begin(), new_live.end());
  return inference_mask(new_positions, key_pos, key_live, new_live);
}

AttentionMask replay_mask(std::span<const PositionId> positions, std::span<const std::uint8_t> live) {
  require<ContractError>(positions.size() == live.size(), "replay_mask: size mismatch");
  AttentionMask mask(positions.size(), positions.size());
  for (std::size_t q = 0; q < positions.size(); ++q) {
    if (!live[q]) continue;
    for (std::size_t k = 0; k <= q; ++k) {
      if (live[k] && positions[k] <= positions[q]) mask.set(q, k, true);
    }
  }
  return mask;
}

AttentionMask causal_mask(std::size_t n) {
  AttentionMask mask(n, n);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t k = 0; k <= q; ++k) mask.set(q, k, true);
  return mask;
}

TrainingSequence build_training_sequence(const SkeletonLayout& layout, const PositionPlan& plan,
                                         const std::vector<TokenSeq>& gold_values) {
  require<ContractError>(plan.position_ids.size() == layout.tokens.size(), "training: plan does not match layout");
  require<ContractError>(gold_values.size() == layout.slots.size(),
                         "training: expected " + std::to_string(layout.slots.size()) + " gold values, got " +
                             std::to_string(gold_values.size()));
  for (std::size_t s = 0; s < gold_values.size(); ++s) {
    require<ContractError>(gold_values[s].size() <= plan.k_max,
                           "training: gold value of slot " + std::to_string(s) + " is longer than k_max");
  }

  TrainingSequence seq;
  std::size_t next_slot = 0;
  for (std::size_t t = 0; t < layout.tokens.size(); ++t) {
    seq.tokens.push_back(layout.tokens[t]);
    seq.positions.push_back(plan.position_ids[t]);
    seq.slot.push_back(-1);
    seq.value_index.push_back(0);
    if (next_slot < layout.slots.size() && layout.slots[next_slot].anchor == t) {
      const auto& value = gold_values[next_slot];
      for (std::size_t k = 1; k <= value.size(); ++k) {
        seq.tokens.push_back(value[k - 1]);
        seq.positions.push_back(plan.position_ids[t] + static_cast<PositionId>(k));
        seq.slot.push_back(static_cast<int>(next_slot));
        seq.value_index.push_back(k);
      }
      ++next_slot;
    }
  }
  return seq;
}

AttentionMask training_mask(const SkeletonLayout& layout, const PositionPlan& plan,
                            const std::vector<TokenSeq>& gold_values) {
  const TrainingSequence seq = build_training_sequence(layout, plan, gold_values);
  const std::size_t n = seq.tokens.size();
  AttentionMask mask(n, n);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      if (seq.positions[k] > seq.positions[q]) continue;
      if (seq.slot[k] >= 0) {
        if (seq.slot[q] < 0) continue;
        if (seq.slot[k] < seq.slot[q] && seq.value_index[k] > seq.value_index[q]) continue;
      }
      mask.set(q, k, true);
    }
  }
  return mask;
}

MaskEquivalenceReport compare_with_training_mask(const SkeletonLayout& layout, const PositionPlan& plan,
                                                 const std::vector<TokenSeq>& gold_values,
                                                 const AttentionMask& train) {
  const TrainingSequence seq = build_training_sequence(layout, plan, gold_values);
  const std::size_t n = seq.tokens.size();
  require<ContractError>(train.queries() == n && train.keys() == n, "compare_with_training_mask: mask size mismatch");

  // Training index of each layout token and of each (slot, k) value token.
  std::vector<std::size_t> layout_to_train(layout.tokens.size());
  std::vector<std::vector<std::size_t>> value_to_train(layout.slots.size());
  for (std::size_t i = 0, t = 0; i < n; ++i) {
    if (seq.slot[i] < 0) layout_to_train[t++] = i;
    else value_to_train[static_cast<std::size_t>(seq.slot[i])].push_back(i);
  }

  MaskEquivalenceReport report;
  std::vector<PositionId> mem_pos;
  std::vector<std::uint8_t> mem_live;
  std::vector<std::size_t> mem_train;

  auto run_pass = [&](const std::vector<PositionId>& new_pos, const std::vector<std::size_t>& new_train) {
    mem_pos.insert(mem_pos.end(), new_pos.begin(), new_pos.end());
    mem_live.insert(mem_live.end(), new_pos.size(), 1);
    mem_train.insert(mem_train.end(), new_train.begin(), new_train.end());
    const AttentionMask inf = inference_mask(new_pos, mem_pos, mem_live);
    std::vector<std::uint8_t> inf_row(n);
    for (std::size_t q = 0; q < new_pos.size(); ++q) {
      std::fill(inf_row.begin(), inf_row.end(), 0);
      for (std::size_t k = 0; k < mem_pos.size(); ++k) {
        if (inf.allowed(q, k)) inf_row[mem_train[k]] = 1;
      }
      const std::size_t tq = new_train[q];
      for (std::size_t tk = 0; tk < n; ++tk) {
        const bool t_ok = train.allowed(tq, tk);
        const bool i_ok = inf_row[tk] != 0;
        if (t_ok != i_ok) report.diffs.push_back({tq, tk, t_ok, i_ok});
      }
      report.pairs_checked += n;
      ++report.queries_checked;
    }
  };

  // Prefill: the whole layout.
  run_pass(plan.position_ids, layout_to_train);

  // Pass k+1 forwards v(s,k) for every slot still active after emitting it.
  for (std::size_t k = 1; k < plan.k_max; ++k) {
    std::vector<PositionId> new_pos;
    std::vector<std::size_t> new_train;
    for (std::size_t s = 0; s < layout.slots.size(); ++s) {
      if (k > gold_values[s].size()) continue;
      new_pos.push_back(plan.position_ids[layout.slots[s].anchor] + static_cast<PositionId>(k));
      new_train.push_back(value_to_train[s][k - 1]);
    }
    if (new_pos.empty()) break;
    run_pass(new_pos, new_train);
  }

  report.equal = report.diffs.empty();
  return report;
}

MaskEquivalenceReport mask_equivalence_check(const SkeletonLayout& layout, const PositionPlan& plan,
                                             const std::vector<TokenSeq>& gold_values) {
  return compare_with_training_mask(layout, plan, gold_values, training_mask(layout, plan, gold_values));
}

std::string MaskEquivalenceReport::summary() const {
  std::ostringstream os;
  os << (equal ? "equal" : "different") << " (" << queries_checked << " queries, " << pairs_checked << " pairs";
  if (!diffs.empty()) {
    os << ", " << diffs.size() << " diffs; first q=" << diffs.front().query << " k=" << diffs.front().key
       << " training=" << diffs.front().training_allowed << " inference=" << diffs.front().inference_allowed;
  }
  os << ")";
  return os.str();
}

std::string to_pbm(const AttentionMask& mask) {
  std::ostringstream os;
  os << "P1\n" << mask.keys() << " " << mask.queries() << "\n";
  for (std::size_t q = 0; q < mask.queries(); ++q) {
    for (std::size_t k = 0; k < mask.keys(); ++k) {
      if (k) os << ' ';
      os << (mask.allowed(q, k) ? '1' : '0');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace hpd
