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

#include "hpd/attention_mask.hpp"
#include "hpd/kv_cache.hpp"
#include "hpd/scheduler.hpp"

namespace hpd {

/// Causal attention in position-id order: allowed(q, k) iff key k is live and
/// key_positions[k] <= query_positions[q]. Non-triangular in memory order once
/// decoded tokens are appended out of logical order. An empty `query_live`
/// means every query is live; a dead (PAD) query row is fully blocked.
AttentionMask inference_mask(std::span<const PositionId> query_positions, std::span<const PositionId> key_positions,
                             std::span<const std::uint8_t> key_live, std::span<const std::uint8_t> query_live = {});

/// Mask for forwarding `new_positions` on top of `cache`: keys are the cached
/// entries followed by the new tokens.
AttentionMask step_mask(const KvCache& cache, std::span<const PositionId> new_positions,
                        std::span<const std::uint8_t> new_live);

/// Inference mask restricted to what a KV cache could have held: over a whole
/// memory-ordered sequence, additionally requires key index <= query index.
AttentionMask replay_mask(std::span<const PositionId> positions, std::span<const std::uint8_t> live);

/// Plain lower-triangular mask over n tokens.
AttentionMask causal_mask(std::size_t n);

/// Layout with gold values inserted into their gaps, in regular token order.
struct TrainingSequence {
  TokenSeq tokens;
  std::vector<PositionId> positions;
  /// Slot index for value tokens, -1 for prompt/attribute/structure tokens.
  std::vector<int> slot;
  /// 1-based index within the value; 0 for non-value tokens.
  std::vector<std::size_t> value_index;
};

TrainingSequence build_training_sequence(const SkeletonLayout& layout, const PositionPlan& plan,
                                         const std::vector<TokenSeq>& gold_values);

/// Position-causal mask that also blocks value token v(n,k) from v(n',k') for
/// n' < n and k' > k, and blocks every non-value token from every value token.
AttentionMask training_mask(const SkeletonLayout& layout, const PositionPlan& plan,
                            const std::vector<TokenSeq>& gold_values);

struct MaskPairDiff {
  std::size_t query = 0;  // training-order indices
  std::size_t key = 0;
  bool training_allowed = false;
  bool inference_allowed = false;
};

struct MaskEquivalenceReport {
  bool equal = true;
  std::size_t queries_checked = 0;
  std::size_t pairs_checked = 0;
  std::vector<MaskPairDiff> diffs;

  std::string summary() const;
};

/// Replays the parallel decode order with gold values (step k makes the k-th
/// token of every value available), collects what each forwarded token could
/// attend to under inference_mask and cache availability, maps it into
/// training order and compares against `train`.
MaskEquivalenceReport compare_with_training_mask(const SkeletonLayout& layout, const PositionPlan& plan,
                                                 const std::vector<TokenSeq>& gold_values,
                                                 const AttentionMask& train);

MaskEquivalenceReport mask_equivalence_check(const SkeletonLayout& layout, const PositionPlan& plan,
                                             const std::vector<TokenSeq>& gold_values);

/// Plain PBM (P1) text grid; 1 marks an allowed pair.
std::string to_pbm(const AttentionMask& mask);

}  // namespace hpd
