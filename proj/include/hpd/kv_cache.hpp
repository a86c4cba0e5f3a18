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

namespace hpd {

using PositionId = std::int32_t;

/// Append-only key/value store. Entries are indexed by memory order and carry
/// the logical position id they were forwarded with; ids need not be monotone.
/// A cache with zero layers only tracks metadata (used by model-free backends).
class KvCache {
 public:
  KvCache() = default;
  KvCache(std::size_t num_layers, std::size_t kv_dim)
      : kv_dim_(kv_dim), keys_(num_layers), values_(num_layers) {}

  std::size_t size() const { return positions_.size(); }
  std::size_t num_layers() const { return keys_.size(); }
  std::size_t kv_dim() const { return kv_dim_; }

  std::span<const PositionId> positions() const { return positions_; }
  std::span<const std::uint8_t> live() const { return live_; }

  /// Reserves zeroed key/value rows for new entries; returns the first index.
  std::size_t grow(std::span<const PositionId> positions, std::span<const std::uint8_t> live) {
    const std::size_t first = size();
    positions_.insert(positions_.end(), positions.begin(), positions.end());
    live_.insert(live_.end(), live.begin(), live.end());
    for (std::size_t l = 0; l < keys_.size(); ++l) {
      keys_[l].resize(size() * kv_dim_, 0.0f);
      values_[l].resize(size() * kv_dim_, 0.0f);
    }
    return first;
  }

  const float* key(std::size_t layer, std::size_t index) const {
    return keys_[layer].data() + index * kv_dim_;
  }
  const float* value(std::size_t layer, std::size_t index) const {
    return values_[layer].data() + index * kv_dim_;
  }
  float* mutable_key(std::size_t layer, std::size_t index) {
    return keys_[layer].data() + index * kv_dim_;
  }
  float* mutable_value(std::size_t layer, std::size_t index) {
    return values_[layer].data() + index * kv_dim_;
  }

  /// Fault injection hook for oracle sensitivity tests.
  void overwrite_position(std::size_t index, PositionId pos) { positions_[index] = pos; }

 private:
  std::size_t kv_dim_ = 0;
  std::vector<PositionId> positions_;
  std::vector<std::uint8_t> live_;
  std::vector<std::vector<float>> keys_;
  std::vector<std::vector<float>> values_;
};

}  // namespace hpd
