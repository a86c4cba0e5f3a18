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
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpd/kv_cache.hpp"
#include "hpd/model.hpp"
#include "hpd/scheduler.hpp"
#include "hpd/scripted.hpp"

namespace hpd {

struct Sampling {
  enum class Mode { greedy, temperature };
  Mode mode = Mode::greedy;
  double temperature = 1.0;

  static Sampling greedy() { return {}; }
  static Sampling with_temperature(double t) { return {Mode::temperature, t}; }
  bool is_greedy() const { return mode == Mode::greedy; }
};

/// Lowest token id among the maxima.
TokenId argmax(std::span<const float> row);

/// Greedy argmax, or softmax(row / tau) sampled from `rng`. Non-finite
/// logits and tau <= 0 are contract errors.
TokenId sample(std::span<const float> row, const Sampling& sampling, std::mt19937_64& rng);

struct DecodeConfig {
  std::size_t k_max = 30;
  std::size_t docs_per_prompt = 6;
  std::size_t batch_size = 1;
  Sampling sampling;
  std::uint64_t seed = 0;
  /// AR budget; defaults to the skeleton length plus k_max per value.
  std::optional<std::size_t> max_new_tokens;

  void validate() const;
  std::size_t ar_budget(std::size_t skeleton_tokens, std::size_t slots) const;
};

struct DecodeTrace {
  std::size_t forward_passes = 0;
  std::vector<std::size_t> tokens_emitted_per_pass;  // delimiters included
  std::vector<std::size_t> query_tokens_per_pass;    // live tokens forwarded
  std::vector<std::size_t> pad_tokens_per_pass;
  std::size_t steps_excluding_delimiter = 0;  // passes that emitted a non-DELIM token
  double wall_clock_s = 0.0;
  std::size_t peak_cache_entries = 0;

  std::size_t total_emitted() const;
  /// Appends a session that ran after this one.
  void append(const DecodeTrace& later);
};

/// What one batch row sent through the model in one pass.
struct ForwardRecord {
  std::size_t prompt = 0;
  std::size_t pass = 0;  // 1-based
  std::span<const TokenId> tokens;
  std::span<const PositionId> positions;
};

/// Token source for decoding. With only `model`, tokens are sampled from its
/// logits. With `script`, tokens come from the planted table; if a model is
/// also set it still runs every forward so wall-clock numbers are realistic.
struct DecodeBackend {
  const Model* model = nullptr;
  const ScriptTable* script = nullptr;
  std::function<void(const ForwardRecord&)> on_forward;
  /// Runs after every pass; lets tests tamper with a prompt's cache.
  std::function<void(std::size_t prompt, std::size_t pass, KvCache&)> after_pass;

  static DecodeBackend tiny(const Model& model) { return {&model, nullptr, {}, {}}; }
  static DecodeBackend scripted(const ScriptTable& script, const Model* timed = nullptr) {
    return {timed, &script, {}, {}};
  }

  KvCache make_cache() const { return model ? model->make_cache() : KvCache(); }
};

struct ExtractedValue {
  std::string doc_id;
  std::string attribute;
  std::optional<std::string> value;
  bool truncated = false;
};

struct ExtractionResult {
  std::vector<ExtractedValue> entries;

  const ExtractedValue* find(const std::string& doc_id, const std::string& attribute) const;
};

/// Trims, strips one pair of surrounding JSON quotes (unescaping), and maps
/// `null` or an empty field to nullopt.
std::optional<std::string> clean_value(std::string_view raw);

ExtractionResult extraction_from_slots(const SkeletonLayout& layout, const std::vector<ValueSlot>& slots);

/// Decode state of one stacked prompt inside a batch.
struct HpdSession {
  const StackedPrompt* prompt = nullptr;
  std::size_t index = 0;  // position in the batch
  KvCache cache;
  std::vector<ValueSlot> slots;
  std::mt19937_64 rng;

  bool done() const { return count_active(slots) == 0; }
};

HpdSession make_session(const DecodeBackend& backend, const StackedPrompt& prompt, const DecodeConfig& config,
                        std::size_t index);

/// Pass 1: forwards every layout as one padded batch and samples the first
/// token of each slot from its anchor row.
void hpd_prefill(const DecodeBackend& backend, std::span<HpdSession> batch, const DecodeConfig& config,
                 DecodeTrace& trace);

/// Later passes: forwards the last token of every active slot at its gap
/// position and samples the next one. Finished prompts are left out.
void hpd_step(const DecodeBackend& backend, std::span<HpdSession> batch, const DecodeConfig& config,
              DecodeTrace& trace);

struct HpdDecodeResult {
  std::vector<ExtractionResult> results;
  std::vector<std::vector<ValueSlot>> slots;
  DecodeTrace trace;
};

/// Decodes `prompts` as one batch until every slot is pruned or truncated.
HpdDecodeResult hpd_decode(const DecodeBackend& backend, const std::vector<StackedPrompt>& prompts,
                           const DecodeConfig& config);

/// Anchor-row logits of the prefill pass, one row per slot.
std::vector<std::vector<float>> hpd_prefill_logits(const Model& model, const StackedPrompt& prompt);

enum class ArStop { delimiter, object_close };

struct ArRequest {
  TokenSeq prompt;  // forwarded at positions 0..|prompt|-1
  ArStop stop = ArStop::object_close;
  /// Closing text of each object, matched in order; the last one ends decoding.
  std::vector<std::string> close_markers;
  std::size_t max_new_tokens = 0;
  TokenSeq script_target;  // full expected output for the scripted backend
};

struct ArOutput {
  TokenSeq tokens;
  bool finished = false;  // end marker reached before the budget ran out
};

struct ArDecodeResult {
  std::vector<ArOutput> outputs;
  DecodeTrace trace;
};

/// Plain one-token-per-pass generation for a batch of requests.
ArDecodeResult ar_generate(const DecodeBackend& backend, const std::vector<ArRequest>& requests,
                           const DecodeConfig& config);

/// Expected AR text for a layout under the script: every object rendered in
/// full, unknown values as null.
std::string render_expected_output(const SkeletonLayout& layout, const ScriptTable& script);

ArRequest make_ar_request(const DecodeBackend& backend, const StackedPrompt& prompt, const DecodeConfig& config);

/// Full-JSON baseline: feeds the prompt without skeleton and stops at the
/// close of the last object.
ArDecodeResult ar_decode(const DecodeBackend& backend, const std::vector<StackedPrompt>& prompts,
                         const DecodeConfig& config);

/// AR continuation of the layout prefix ending at `slot`'s anchor, stopping
/// at DELIM or k_max tokens. Returns the value without DELIM.
TokenSeq ar_value(const DecodeBackend& backend, const StackedPrompt& prompt, std::size_t slot,
                  const DecodeConfig& config);

/// Cache-free replay of hpd_decode for one prompt: every pass re-forwards the
/// whole memory-ordered sequence under replay_mask. Greedy only.
std::vector<ValueSlot> oracle_full_recompute(const Model& model, const StackedPrompt& prompt,
                                             const DecodeConfig& config);

/// One slot decoded alone from the layout cut after its anchor, with gapped
/// positions and plain causal masking. Greedy only.
TokenSeq oracle_independent(const Model& model, const StackedPrompt& prompt, std::size_t slot,
                            const DecodeConfig& config);

}  // namespace hpd
