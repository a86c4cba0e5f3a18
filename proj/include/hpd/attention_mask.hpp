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

/// Dense boolean relation allowed(query, key). Keys index the concatenation
/// of cached entries followed by the current step's query tokens.
class AttentionMask {
 public:
  AttentionMask() = default;
  AttentionMask(std::size_t queries, std::size_t keys, bool fill = false)
      : queries_(queries), keys_(keys), bits_(queries * keys, fill ? 1 : 0) {}

  std::size_t queries() const { return queries_; }
  std::size_t keys() const { return keys_; }

  bool allowed(std::size_t q, std::size_t k) const { return bits_[q * keys_ + k] != 0; }
  void set(std::size_t q, std::size_t k, bool v) { bits_[q * keys_ + k] = v ? 1 : 0; }

  std::span<const std::uint8_t> row(std::size_t q) const {
    return {bits_.data() + q * keys_, keys_};
  }

  std::size_t count_allowed() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  bool operator==(const AttentionMask&) const = default;

 private:
  std::size_t queries_ = 0;
  std::size_t keys_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace hpd
