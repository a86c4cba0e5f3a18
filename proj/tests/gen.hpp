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

#include <cstdint>
#include <random>
#include <vector>

#include "hpd/tokenizer.hpp"
#include "hpd/kv_cache.hpp"

namespace hpd::test {

// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  bool coin() { return (rng_() & 1) != 0; }

  TokenSeq tokens(std::size_t n) {
    TokenSeq t(n);
    for (auto& x : t) x = static_cast<TokenId>(32 + below(95));
    return t;
  }

  std::vector<PositionId> increasing_positions(std::size_t n, PositionId start = 0) {
    std::vector<PositionId> p(n);
    PositionId cur = start;
    for (auto& x : p) {
      x = cur;
      cur += 1 + static_cast<PositionId>(below(4));
    }
    return p;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace hpd::test
