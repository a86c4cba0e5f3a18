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

#include "hpd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hpd/errors.hpp"
#include "hpd/masks.hpp"

namespace hpd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::optional<Logits> run_row(const DecodeBackend& backend, KvCache& cache, const BatchRow& row,
                              std::span<const std::uint8_t> live, std::size_t prompt, std::size_t pass) {
  if (backend.on_forward) backend.on_forward({prompt, pass, row.tokens, row.positions});
  if (backend.model == nullptr) {
    cache.grow(row.positions, live);
    return std::nullopt;
  }
  const AttentionMask mask = step_mask(cache, row.positions, live);
  return backend.model->forward(row.tokens, row.positions, mask, cache);
}

TokenId next_value_token(const DecodeBackend& backend, const SkeletonLayout& layout, const ValueSlot& slot,
                         const std::optional<Logits>& logits, std::size_t row, const Sampling& sampling,
                         std::mt19937_64& rng) {
  if (backend.script != nullptr) {
    return scripted_next(*backend.script, layout.doc_ids[slot.doc_index], layout.attributes[slot.attr_index],
                         slot.emitted);
  }
  return sample(logits->row(row), sampling, rng);
}

struct PassTally {
  std::size_t emitted = 0;
  std::size_t non_delim = 0;
  std::size_t queries = 0;
  std::size_t pads = 0;

  void count(TokenId t) {
    ++emitted;
    if (t != tokens::kDelim) ++non_delim;
  }
};

void record_pass(DecodeTrace& trace, const PassTally& tally) {
  ++trace.forward_passes;
  trace.tokens_emitted_per_pass.push_back(tally.emitted);
  trace.query_tokens_per_pass.push_back(tally.queries);
  trace.pad_tokens_per_pass.push_back(tally.pads);
  if (tally.non_delim > 0) ++trace.steps_excluding_delimiter;
}

void require_backend(const DecodeBackend& backend) {
  require<ContractError>(backend.model != nullptr || backend.script != nullptr,
                         "decode backend has neither a model nor a script");
}

std::mt19937_64 prompt_rng(std::uint64_t seed, std::size_t index) {
  return std::mt19937_64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

}  // namespace

TokenId argmax(std::span<const float> row) {
  require<ContractError>(!row.empty(), "argmax: empty logits row");
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

TokenId sample(std::span<const float> row, const Sampling& sampling, std::mt19937_64& rng) {
  for (float v : row) require<ContractError>(std::isfinite(v), "sample: non-finite logit");
  if (sampling.is_greedy()) return argmax(row);
  require<ContractError>(sampling.temperature > 0.0, "sample: temperature must be > 0");

  const double top = row[argmax(row)];
  std::vector<double> weights(row.size());
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    weights[i] = std::exp((static_cast<double>(row[i]) - top) / sampling.temperature);
    total += weights[i];
  }
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last);
}

void DecodeConfig::validate() const {
  require<ConfigError>(k_max >= 1, "k_max must be >= 1");
  require<ConfigError>(docs_per_prompt >= 1, "docs_per_prompt must be >= 1");
  require<ConfigError>(batch_size >= 1, "batch_size must be >= 1");
  require<ConfigError>(sampling.is_greedy() || sampling.temperature > 0.0, "temperature must be > 0");
}

std::size_t DecodeConfig::ar_budget(std::size_t skeleton_tokens, std::size_t slots) const {
  return max_new_tokens.value_or(skeleton_tokens + slots * k_max);
}

std::size_t DecodeTrace::total_emitted() const {
  std::size_t n = 0;
  for (auto t : tokens_emitted_per_pass) n += t;
  return n;
}

void DecodeTrace::append(const DecodeTrace& later) {
  forward_passes += later.forward_passes;
  tokens_emitted_per_pass.insert(tokens_emitted_per_pass.end(), later.tokens_emitted_per_pass.begin(),
                                 later.tokens_emitted_per_pass.end());
  query_tokens_per_pass.insert(query_tokens_per_pass.end(), later.query_tokens_per_pass.begin(),
                               later.query_tokens_per_pass.end());
  pad_tokens_per_pass.insert(pad_tokens_per_pass.end(), later.pad_tokens_per_pass.begin(),
                             later.pad_tokens_per_pass.end());
  steps_excluding_delimiter += later.steps_excluding_delimiter;
  wall_clock_s += later.wall_clock_s;
  peak_cache_entries = std::max(peak_cache_entries, later.peak_cache_entries);
}

const ExtractedValue* ExtractionResult::find(const std::string& doc_id, const std::string& attribute) const {
  for (const auto& e : entries) {
    if (e.doc_id == doc_id && e.attribute == attribute) return &e;
  }
  return nullptr;
}

std::optional<std::string> clean_value(std::string_view raw) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);
  if (raw.empty() || raw == "null") return std::nullopt;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        const char c = raw[++i];
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += c;
        }
      } else {
        out += raw[i];
      }
    }
    if (out.empty()) return std::nullopt;
    return out;
  }
  return std::string(raw);
}

ExtractionResult extraction_from_slots(const SkeletonLayout& layout, const std::vector<ValueSlot>& slots) {
  ExtractionResult result;
  result.entries.reserve(slots.size());
  for (const auto& s : slots) {
    ExtractedValue e;
    e.doc_id = layout.doc_ids[s.doc_index];
    e.attribute = layout.attributes[s.attr_index];
    e.value = clean_value(detokenize(s.emitted));
    e.truncated = s.state == SlotState::truncated;
    result.entries.push_back(std::move(e));
  }
  return result;
}

HpdSession make_session(const DecodeBackend& backend, const StackedPrompt& prompt, const DecodeConfig& config,
                        std::size_t index) {
  require<ContractError>(prompt.plan.k_max == config.k_max,
                         "prompt was planned with k_max=" + std::to_string(prompt.plan.k_max) +
                             " but the decode config has k_max=" + std::to_string(config.k_max));
  HpdSession s;
  s.prompt = &prompt;
  s.index = index;
  s.cache = backend.make_cache();
  s.slots = make_slots(prompt.layout, prompt.plan);
  s.rng = prompt_rng(config.seed, index);
  return s;
}

void hpd_prefill(const DecodeBackend& backend, std::span<HpdSession> batch, const DecodeConfig& config,
                 DecodeTrace& trace) {
  require_backend(backend);
  require<ContractError>(!batch.empty(), "hpd_prefill: empty batch");
  std::vector<BatchRow> rows;
  for (const auto& s : batch) {
    require<ContractError>(s.cache.size() == 0, "hpd_prefill: cache must be empty");
    require<ContractError>(!s.slots.empty(), "hpd_prefill: prompt has no value slots");
    rows.push_back({s.prompt->layout.tokens, s.prompt->plan.position_ids});
  }
  const PaddedBatch padded = pad_batch(rows);
  const std::size_t pass = trace.forward_passes + 1;

  PassTally tally;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    HpdSession& s = batch[r];
    const auto logits = run_row(backend, s.cache, padded.rows[r], padded.live[r], s.index, pass);
    std::vector<TokenId> sampled;
    for (const auto& slot : s.slots) {
      const TokenId t = next_value_token(backend, s.prompt->layout, slot, logits, slot.anchor, config.sampling, s.rng);
      sampled.push_back(t);
      tally.count(t);
    }
    advance(s.slots, sampled, s.prompt->plan.k_max);
    tally.queries += rows[r].tokens.size();
    tally.pads += padded.pad_counts[r];
  }
  if (backend.after_pass) {
    for (auto& s : batch) backend.after_pass(s.index, pass, s.cache);
  }
  record_pass(trace, tally);
}

void hpd_step(const DecodeBackend& backend, std::span<HpdSession> batch, const DecodeConfig& config,
              DecodeTrace& trace) {
  require_backend(backend);
  std::vector<HpdSession*> live_sessions;
  std::vector<BatchRow> rows;
  for (auto& s : batch) {
    if (s.done()) continue;
    BatchRow row;
    for (const auto& slot : s.slots) {
      if (!slot.active()) continue;
      require<ContractError>(!slot.emitted.empty(), "hpd_step: active slot has no token yet; run hpd_prefill first");
      row.tokens.push_back(slot.emitted.back());
      row.positions.push_back(slot.anchor_position + static_cast<PositionId>(slot.emitted.size()));
    }
    live_sessions.push_back(&s);
    rows.push_back(std::move(row));
  }
  require<ContractError>(!live_sessions.empty(), "hpd_step: no active slots");
  const PaddedBatch padded = pad_batch(rows);
  const std::size_t pass = trace.forward_passes + 1;

  PassTally tally;
  for (std::size_t r = 0; r < live_sessions.size(); ++r) {
    HpdSession& s = *live_sessions[r];
    const auto logits = run_row(backend, s.cache, padded.rows[r], padded.live[r], s.index, pass);
    std::vector<TokenId> sampled;
    std::size_t row = 0;
    for (const auto& slot : s.slots) {
      if (!slot.active()) continue;
      const TokenId t = next_value_token(backend, s.prompt->layout, slot, logits, row++, config.sampling, s.rng);
      sampled.push_back(t);
      tally.count(t);
    }
    advance(s.slots, sampled, s.prompt->plan.k_max);
    tally.queries += rows[r].tokens.size();
    tally.pads += padded.pad_counts[r];
  }
  if (backend.after_pass) {
    for (auto* s : live_sessions) backend.after_pass(s->index, pass, s->cache);
  }
  record_pass(trace, tally);
}

HpdDecodeResult hpd_decode(const DecodeBackend& backend, const std::vector<StackedPrompt>& prompts,
                           const DecodeConfig& config) {
  config.validate();
  require_backend(backend);
  require<ContractError>(!prompts.empty(), "hpd_decode: no prompts");

  std::vector<HpdSession> sessions;
  sessions.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) sessions.push_back(make_session(backend, prompts[i], config, i));

  HpdDecodeResult out;
  const auto start = Clock::now();
  hpd_prefill(backend, sessions, config, out.trace);
  while (std::any_of(sessions.begin(), sessions.end(), [](const HpdSession& s) { return !s.done(); })) {
    hpd_step(backend, sessions, config, out.trace);
  }
  out.trace.wall_clock_s = seconds_since(start);

  for (const auto& s : sessions) {
    out.trace.peak_cache_entries += s.cache.size();
    out.results.push_back(extraction_from_slots(s.prompt->layout, s.slots));
    out.slots.push_back(s.slots);
  }
  return out;
}

std::vector<std::vector<float>> hpd_prefill_logits(const Model& model, const StackedPrompt& prompt) {
  const auto& layout = prompt.layout;
  const std::vector<std::uint8_t> live(layout.tokens.size(), 1);
  const AttentionMask mask = inference_mask(prompt.plan.position_ids, prompt.plan.position_ids, live, live);
  KvCache cache = model.make_cache();
  const Logits logits = model.forward(layout.tokens, prompt.plan.position_ids, mask, cache);
  std::vector<std::vector<float>> rows;
  for (const auto& slot : layout.slots) {
    const auto r = logits.row(slot.anchor);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

ArDecodeResult ar_generate(const DecodeBackend& backend, const std::vector<ArRequest>& requests,
                           const DecodeConfig& config) {
  config.validate();
  require_backend(backend);
  require<ContractError>(!requests.empty(), "ar_generate: no requests");

  struct State {
    const ArRequest* req;
    KvCache cache;
    std::string text;
    std::size_t closes_seen = 0;
    std::mt19937_64 rng;
    bool active = true;
  };
  ArDecodeResult out;
  out.outputs.resize(requests.size());
  std::vector<State> states;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    require<ContractError>(!requests[i].prompt.empty(), "ar_generate: empty prompt");
    require<ContractError>(requests[i].stop == ArStop::delimiter || !requests[i].close_markers.empty(),
                           "ar_generate: object_close stop needs close markers");
    states.push_back({&requests[i], backend.make_cache(), {}, 0, prompt_rng(config.seed, i), true});
  }

  // Appends one token and updates the stop state.
  auto accept = [&](std::size_t i, TokenId t) {
    State& s = states[i];
    ArOutput& o = out.outputs[i];
    o.tokens.push_back(t);
    if (s.req->stop == ArStop::delimiter) {
      if (t == tokens::kDelim) o.finished = true;
    } else if (t >= 0 && t < tokens::kByteCount) {
      s.text += static_cast<char>(t);
      if (s.text.ends_with(s.req->close_markers[s.closes_seen])) {
        if (++s.closes_seen == s.req->close_markers.size()) o.finished = true;
      }
    }
    if (o.finished || o.tokens.size() >= s.req->max_new_tokens) s.active = false;
  };
  auto choose = [&](std::size_t i, const std::optional<Logits>& logits, std::size_t row) {
    State& s = states[i];
    if (backend.script != nullptr) {
      const std::size_t k = out.outputs[i].tokens.size();
      return k < s.req->script_target.size() ? s.req->script_target[k] : tokens::kDelim;
    }
    return sample(logits->row(row), config.sampling, s.rng);
  };

  const auto start = Clock::now();
  std::vector<BatchRow> rows;
  for (const auto& r : requests) {
    BatchRow row{r.prompt, {}};
    for (std::size_t p = 0; p < r.prompt.size(); ++p) row.positions.push_back(static_cast<PositionId>(p));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  while (!order.empty()) {
    const PaddedBatch padded = pad_batch(rows);
    const std::size_t pass = out.trace.forward_passes + 1;
    PassTally tally;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      const auto logits = run_row(backend, states[i].cache, padded.rows[r], padded.live[r], i, pass);
      tally.queries += rows[r].tokens.size();
      tally.pads += padded.pad_counts[r];
      if (states[i].req->max_new_tokens == 0) {
        states[i].active = false;
        continue;
      }
      const TokenId t = choose(i, logits, rows[r].tokens.size() - 1);
      tally.count(t);
      accept(i, t);
    }
    if (backend.after_pass) {
      for (auto i : order) backend.after_pass(i, pass, states[i].cache);
    }
    record_pass(out.trace, tally);

    std::vector<std::size_t> next_order;
    std::vector<BatchRow> next_rows;
    for (auto i : order) {
      if (!states[i].active) continue;
      const auto& toks = out.outputs[i].tokens;
      const auto pos = static_cast<PositionId>(requests[i].prompt.size() + toks.size() - 1);
      next_order.push_back(i);
      next_rows.push_back({{toks.back()}, {pos}});
    }
    order = std::move(next_order);
    rows = std::move(next_rows);
  }
  out.trace.wall_clock_s = seconds_since(start);
  for (const auto& s : states) out.trace.peak_cache_entries += s.cache.size();
  return out;
}

std::string render_expected_output(const SkeletonLayout& layout, const ScriptTable& script) {
  const auto& fmt = layout.format;
  std::string out;
  for (const auto& id : layout.doc_ids) {
    out += replace_all(fmt.object_open, "{id}", id);
    for (const auto& attr : layout.attributes) {
      const std::string* v = script.find(id, attr);
      out += fmt.row_prefix(attr);
      out += v ? *v : std::string("null");
      out += fmt.row_suffix();
    }
    out += replace_all(fmt.object_close, "{id}", id);
  }
  return out;
}

ArRequest make_ar_request(const DecodeBackend& backend, const StackedPrompt& prompt, const DecodeConfig& config) {
  const auto& layout = prompt.layout;
  ArRequest req;
  req.prompt = layout.prompt_tokens();
  req.stop = ArStop::object_close;
  for (const auto& id : layout.doc_ids) req.close_markers.push_back(replace_all(layout.format.object_close, "{id}", id));
  req.max_new_tokens = config.ar_budget(layout.tokens.size() - layout.prompt_length, layout.slots.size());
  if (backend.script != nullptr) req.script_target = tokenize(render_expected_output(layout, *backend.script));
  return req;
}

ArDecodeResult ar_decode(const DecodeBackend& backend, const std::vector<StackedPrompt>& prompts,
                         const DecodeConfig& config) {
  std::vector<ArRequest> requests;
  for (const auto& p : prompts) requests.push_back(make_ar_request(backend, p, config));
  return ar_generate(backend, requests, config);
}

TokenSeq ar_value(const DecodeBackend& backend, const StackedPrompt& prompt, std::size_t slot,
                  const DecodeConfig& config) {
  const auto& layout = prompt.layout;
  require<ContractError>(slot < layout.slots.size(), "ar_value: no such slot");
  const SlotRef& ref = layout.slots[slot];
  ArRequest req;
  req.prompt.assign(layout.tokens.begin(), layout.tokens.begin() + static_cast<std::ptrdiff_t>(ref.anchor + 1));
  req.stop = ArStop::delimiter;
  req.max_new_tokens = prompt.plan.k_max;
  if (backend.script != nullptr) {
    const std::string* v = backend.script->find(layout.doc_ids[ref.doc_index], layout.attributes[ref.attr_index]);
    req.script_target = tokenize(v ? *v : std::string());
    req.script_target.push_back(tokens::kDelim);
  }
  TokenSeq value = ar_generate(backend, {req}, config).outputs.front().tokens;
  if (!value.empty() && value.back() == tokens::kDelim) value.pop_back();
  return value;
}

std::vector<ValueSlot> oracle_full_recompute(const Model& model, const StackedPrompt& prompt,
                                             const DecodeConfig& config) {
  require<ContractError>(config.sampling.is_greedy(), "oracle_full_recompute: greedy sampling required");
  const auto& layout = prompt.layout;
  std::vector<ValueSlot> slots = make_slots(layout, prompt.plan);
  require<ContractError>(!slots.empty(), "oracle_full_recompute: prompt has no value slots");

  TokenSeq seq = layout.tokens;
  std::vector<PositionId> pos = prompt.plan.position_ids;
  std::vector<std::size_t> rows;
  for (const auto& s : slots) rows.push_back(s.anchor);

  while (true) {
    const std::vector<std::uint8_t> live(seq.size(), 1);
    KvCache cache = model.make_cache();
    const Logits logits = model.forward(seq, pos, replay_mask(pos, live), cache);
    std::vector<TokenId> sampled;
    for (auto r : rows) sampled.push_back(argmax(logits.row(r)));
    advance(slots, sampled, prompt.plan.k_max);
    if (count_active(slots) == 0) break;

    rows.clear();
    for (const auto& s : slots) {
      if (!s.active()) continue;
      rows.push_back(seq.size());
      seq.push_back(s.emitted.back());
      pos.push_back(s.anchor_position + static_cast<PositionId>(s.emitted.size()));
    }
  }
  return slots;
}

TokenSeq oracle_independent(const Model& model, const StackedPrompt& prompt, std::size_t slot,
                            const DecodeConfig& config) {
  require<ContractError>(config.sampling.is_greedy(), "oracle_independent: greedy sampling required");
  const auto& layout = prompt.layout;
  require<ContractError>(slot < layout.slots.size(), "oracle_independent: no such slot");
  const std::size_t anchor = layout.slots[slot].anchor;
  const auto n = static_cast<std::ptrdiff_t>(anchor + 1);
  const TokenSeq head(layout.tokens.begin(), layout.tokens.begin() + n);
  const std::vector<PositionId> head_pos(prompt.plan.position_ids.begin(), prompt.plan.position_ids.begin() + n);
  const PositionId anchor_pos = prompt.plan.position_ids[anchor];

  KvCache cache = model.make_cache();
  Logits logits = model.forward(head, head_pos, causal_mask(head.size()), cache);
  TokenId t = argmax(logits.row(head.size() - 1));
  TokenSeq value;
  while (t != tokens::kDelim) {
    value.push_back(t);
    if (value.size() >= prompt.plan.k_max) break;
    const TokenId in[] = {t};
    const PositionId p[] = {anchor_pos + static_cast<PositionId>(value.size())};
    logits = model.forward(in, p, AttentionMask(1, cache.size() + 1, true), cache);
    t = argmax(logits.row(0));
  }
  return value;
}

}  // namespace hpd
