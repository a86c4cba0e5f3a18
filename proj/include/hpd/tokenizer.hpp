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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpd {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Byte-level vocabulary: ids 0..255 are raw bytes, followed by control tokens.
namespace tokens {
inline constexpr TokenId kPad = 256;
inline constexpr TokenId kBos = 257;
/// DELIM is the '\n' byte under a second name; it terminates a value.
inline constexpr TokenId kDelim = '\n';
inline constexpr int kByteCount = 256;
inline constexpr int kMinVocab = 260;
}  // namespace tokens

TokenSeq tokenize(std::string_view text);

/// Control tokens other than DELIM are dropped.
std::string detokenize(std::span<const TokenId> seq);

}  // namespace hpd
