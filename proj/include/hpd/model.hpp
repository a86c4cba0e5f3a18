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
#include <vector>

#include "hpd/attention_mask.hpp"
#include "hpd/kv_cache.hpp"
#include "hpd/tokenizer.hpp"

namespace hpd {

struct ModelConfig {
  std::size_t vocab_size = 260;
  std::size_t num_layers = 4;
  std::size_t hidden_dim = 64;
  std::size_t num_heads = 4;
  std::size_t head_dim = 16;
  double rope_base = 10000.0;
  std::size_t max_position = 8192;
  std::uint64_t seed = 0;
  /// Added to the DELIM logit. Lets a randomly initialized model end values.
  float delim_bias = 0.0f;

  std::size_t ffn_dim() const { return 4 * hidden_dim; }

  /// Throws ConfigError when dimensions are inconsistent.
  void validate() const;
};

/// Default desk-scale configuration.
ModelConfig toy_config(std::uint64_t seed = 0);

/// Raw pre-softmax scores, one row of vocab_size per query token.
struct Logits {
  std::size_t rows = 0;
  std::size_t vocab = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t i) const { return {data.data() + i * vocab, vocab}; }
};

/// Deterministic decoder-only transformer: RMSNorm, rotary attention over an
/// explicit mask, ReLU MLP. Weights are immutable after construction, so one
/// Model can serve any number of sessions, each owning its KvCache.
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  KvCache make_cache() const { return KvCache(config_.num_layers, config_.hidden_dim); }

  /// Runs `tokens` as queries at `positions`. `mask` is |tokens| x (cache.size() + |tokens|).
  /// Appends one cache entry per token; PAD tokens are stored as not-live.
  /// Masked keys are left out of the softmax normalizer, so they have no influence.
  /// A query with no allowed key gets a zero attention output (only PAD rows).
  Logits forward(std::span<const TokenId> tokens, std::span<const PositionId> positions,
                 const AttentionMask& mask, KvCache& cache) const;

  /// FNV-1a over the raw bits of one layer's weights.
  std::uint64_t layer_checksum(std::size_t layer) const;

 private:
  struct Layer {
    std::vector<float> attn_norm;
    std::vector<float> wq, wk, wv, wo;  // stored input-major: [in][out]
    std::vector<float> mlp_norm;
    std::vector<float> w_up, w_down;
  };

  void rotate(float* vec, PositionId pos) const;

  ModelConfig config_;
  std::vector<float> embedding_;  // [vocab][hidden]
  std::vector<Layer> layers_;
  std::vector<float> final_norm_;
  std::vector<float> lm_head_;  // [hidden][vocab]
  std::vector<float> lm_bias_;
  std::vector<float> rope_cos_;  // [max_position][head_dim / 2]
  std::vector<float> rope_sin_;
};

inline Model init_model(const ModelConfig& config) { return Model(config); }

}  // namespace hpd
