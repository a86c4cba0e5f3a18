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

#include "hpd/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hpd/errors.hpp"

namespace hpd {

namespace {

// Raw engine bits only; std distributions are implementation-defined.
class WeightStream {
 public:
  explicit WeightStream(std::uint64_t seed) : engine_(seed) {}

  void fill(std::vector<float>& out, std::size_t n, double bound) {
    out.resize(n);
    for (auto& w : out) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      w = static_cast<float>((2.0 * u - 1.0) * bound);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// out[o] = sum_j in[j] * w[j][o]. Each output accumulates in j order, so
// results do not depend on how many rows are processed together.
void matvec(const float* in, std::size_t in_dim, const float* w, std::size_t out_dim, float* out) {
  for (std::size_t o = 0; o < out_dim; ++o) out[o] = 0.0f;
  for (std::size_t j = 0; j < in_dim; ++j) {
    const float xj = in[j];
    const float* row = w + j * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) out[o] += xj * row[o];
  }
}

void rmsnorm(const float* in, const float* gain, std::size_t dim, float* out) {
  float ms = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) ms += in[i] * in[i];
  ms /= static_cast<float>(dim);
  const float scale = 1.0f / std::sqrt(ms + 1e-5f);
  for (std::size_t i = 0; i < dim; ++i) out[i] = in[i] * scale * gain[i];
}

std::uint64_t fnv1a(std::uint64_t h, const std::vector<float>& v) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < v.size() * sizeof(float); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void ModelConfig::validate() const {
  require<ConfigError>(num_layers >= 1, "num_layers must be >= 1");
  require<ConfigError>(num_heads >= 1, "num_heads must be >= 1");
  require<ConfigError>(hidden_dim % num_heads == 0,
                       "hidden_dim " + std::to_string(hidden_dim) + " is not divisible by num_heads " +
                           std::to_string(num_heads));
  require<ConfigError>(head_dim == hidden_dim / num_heads, "head_dim must equal hidden_dim / num_heads");
  require<ConfigError>(head_dim % 2 == 0, "head_dim must be even for rotary embedding");
  require<ConfigError>(vocab_size >= static_cast<std::size_t>(tokens::kMinVocab),
                       "vocab_size must be >= 260 (bytes plus control tokens)");
  require<ConfigError>(rope_base > 0.0, "rope_base must be positive");
  require<ConfigError>(max_position >= 1, "max_position must be >= 1");
}

ModelConfig toy_config(std::uint64_t seed) {
  ModelConfig c;
  c.seed = seed;
  return c;
}

Model::Model(ModelConfig config) : config_(config) {
  config_.validate();
  const std::size_t d = config_.hidden_dim;
  const std::size_t f = config_.ffn_dim();
  const std::size_t v = config_.vocab_size;

  WeightStream rng(config_.seed);
  rng.fill(embedding_, v * d, std::sqrt(3.0));
  layers_.resize(config_.num_layers);
  const double proj = std::sqrt(3.0 / static_cast<double>(d));
  const double down = std::sqrt(3.0 / static_cast<double>(f));
  for (auto& layer : layers_) {
    layer.attn_norm.assign(d, 1.0f);
    rng.fill(layer.wq, d * d, proj);
    rng.fill(layer.wk, d * d, proj);
    rng.fill(layer.wv, d * d, proj);
    rng.fill(layer.wo, d * d, proj);
    layer.mlp_norm.assign(d, 1.0f);
    rng.fill(layer.w_up, d * f, proj);
    rng.fill(layer.w_down, f * d, down);
  }
  final_norm_.assign(d, 1.0f);
  rng.fill(lm_head_, d * v, proj);
  lm_bias_.assign(v, 0.0f);
  lm_bias_[tokens::kDelim] = config_.delim_bias;

  const std::size_t half = config_.head_dim / 2;
  rope_cos_.resize(config_.max_position * half);
  rope_sin_.resize(config_.max_position * half);
  for (std::size_t i = 0; i < half; ++i) {
    const double inv_freq =
        std::pow(config_.rope_base, -2.0 * static_cast<double>(i) / static_cast<double>(config_.head_dim));
    for (std::size_t p = 0; p < config_.max_position; ++p) {
      const double angle = static_cast<double>(p) * inv_freq;
      rope_cos_[p * half + i] = static_cast<float>(std::cos(angle));
      rope_sin_[p * half + i] = static_cast<float>(std::sin(angle));
    }
  }
}

void Model::rotate(float* vec, PositionId pos) const {
  const std::size_t hd = config_.head_dim;
  const std::size_t half = hd / 2;
  const float* c = rope_cos_.data() + static_cast<std::size_t>(pos) * half;
  const float* s = rope_sin_.data() + static_cast<std::size_t>(pos) * half;
  for (std::size_t h = 0; h < config_.num_heads; ++h) {
    float* head = vec + h * hd;
    for (std::size_t i = 0; i < half; ++i) {
      const float x0 = head[2 * i];
      const float x1 = head[2 * i + 1];
      head[2 * i] = x0 * c[i] - x1 * s[i];
      head[2 * i + 1] = x0 * s[i] + x1 * c[i];
    }
  }
}

Logits Model::forward(std::span<const TokenId> tokens, std::span<const PositionId> positions,
                      const AttentionMask& mask, KvCache& cache) const {
  const std::size_t n = tokens.size();
  require<ContractError>(positions.size() == n, "forward: token and position counts differ");
  require<ContractError>(mask.queries() == n && mask.keys() == cache.size() + n,
                         "forward: mask is " + std::to_string(mask.queries()) + "x" +
                             std::to_string(mask.keys()) + ", expected " + std::to_string(n) + "x" +
                             std::to_string(cache.size() + n));
  require<ContractError>(cache.num_layers() == config_.num_layers && cache.kv_dim() == config_.hidden_dim,
                         "forward: cache was not created for this model");
  for (std::size_t i = 0; i < n; ++i) {
    require<ContractError>(tokens[i] >= 0 && static_cast<std::size_t>(tokens[i]) < config_.vocab_size,
                           "forward: token id out of vocabulary");
    require<CapacityError>(positions[i] >= 0 && static_cast<std::size_t>(positions[i]) < config_.max_position,
                           "forward: position id " + std::to_string(positions[i]) + " >= max_position " +
                               std::to_string(config_.max_position));
  }

  const std::size_t d = config_.hidden_dim;
  const std::size_t f = config_.ffn_dim();
  const std::size_t hd = config_.head_dim;
  const float inv_sqrt_hd = 1.0f / std::sqrt(static_cast<float>(hd));

  std::vector<std::uint8_t> live(n);
  for (std::size_t i = 0; i < n; ++i) live[i] = tokens[i] != tokens::kPad ? 1 : 0;
  const std::size_t first = cache.grow(positions, live);
  const std::size_t total = cache.size();

  std::vector<float> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const float* e = embedding_.data() + static_cast<std::size_t>(tokens[i]) * d;
    std::copy(e, e + d, x.data() + i * d);
  }

  std::vector<float> h(d), q(n * d), attn(d), proj(d), up(f), scores(total);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    for (std::size_t i = 0; i < n; ++i) {
      rmsnorm(x.data() + i * d, layer.attn_norm.data(), d, h.data());
      matvec(h.data(), d, layer.wq.data(), d, q.data() + i * d);
      float* k = cache.mutable_key(l, first + i);
      float* v = cache.mutable_value(l, first + i);
      matvec(h.data(), d, layer.wk.data(), d, k);
      matvec(h.data(), d, layer.wv.data(), d, v);
      rotate(q.data() + i * d, positions[i]);
      rotate(k, positions[i]);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const auto allowed = mask.row(i);
      const float* qi = q.data() + i * d;
      std::fill(attn.begin(), attn.end(), 0.0f);
      for (std::size_t head = 0; head < config_.num_heads; ++head) {
        const std::size_t off = head * hd;
        float max_score = -std::numeric_limits<float>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < total; ++j) {
          if (!allowed[j]) continue;
          const float* kj = cache.key(l, j) + off;
          float s = 0.0f;
          for (std::size_t t = 0; t < hd; ++t) s += qi[off + t] * kj[t];
          s *= inv_sqrt_hd;
          scores[j] = s;
          if (s > max_score) max_score = s;
          any = true;
        }
        if (!any) continue;
        float denom = 0.0f;
        for (std::size_t j = 0; j < total; ++j) {
          if (!allowed[j]) continue;
          scores[j] = std::exp(scores[j] - max_score);
          denom += scores[j];
        }
        float* out = attn.data() + off;
        for (std::size_t j = 0; j < total; ++j) {
          if (!allowed[j]) continue;
          const float p = scores[j] / denom;
          const float* vj = cache.value(l, j) + off;
          for (std::size_t t = 0; t < hd; ++t) out[t] += p * vj[t];
        }
      }
      matvec(attn.data(), d, layer.wo.data(), d, proj.data());
      float* xi = x.data() + i * d;
      for (std::size_t t = 0; t < d; ++t) xi[t] += proj[t];

      rmsnorm(xi, layer.mlp_norm.data(), d, h.data());
      matvec(h.data(), d, layer.w_up.data(), f, up.data());
      for (auto& u : up) u = u > 0.0f ? u : 0.0f;
      matvec(up.data(), f, layer.w_down.data(), d, proj.data());
      for (std::size_t t = 0; t < d; ++t) xi[t] += proj[t];
    }
  }

  Logits logits;
  logits.rows = n;
  logits.vocab = config_.vocab_size;
  logits.data.resize(n * config_.vocab_size);
  for (std::size_t i = 0; i < n; ++i) {
    rmsnorm(x.data() + i * d, final_norm_.data(), d, h.data());
    float* row = logits.data.data() + i * config_.vocab_size;
    matvec(h.data(), d, lm_head_.data(), config_.vocab_size, row);
    for (std::size_t t = 0; t < config_.vocab_size; ++t) row[t] += lm_bias_[t];
  }
  return logits;
}

std::uint64_t Model::layer_checksum(std::size_t layer) const {
  require<ContractError>(layer < layers_.size(), "layer_checksum: no such layer");
  const Layer& l = layers_[layer];
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* w : {&l.attn_norm, &l.wq, &l.wk, &l.wv, &l.wo, &l.mlp_norm, &l.w_up, &l.w_down}) {
    h = fnv1a(h, *w);
  }
  return h;
}

}  // namespace hpd
