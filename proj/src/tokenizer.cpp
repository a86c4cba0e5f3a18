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

#include "hpd/tokenizer.hpp"

namespace hpd {

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  out.reserve(text.size());
  for (unsigned char c : text) out.push_back(static_cast<TokenId>(c));
  return out;
}

std::string detokenize(std::span<const TokenId> seq) {
  std::string out;
  out.reserve(seq.size());
  for (TokenId t : seq) {
    if (t >= 0 && t < tokens::kByteCount) out.push_back(static_cast<char>(t));
  }
  return out;
}

}  // namespace hpd
