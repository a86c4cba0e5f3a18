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

#include "hpd/scripted.hpp"

namespace hpd {

TokenId scripted_next(const ScriptTable& script, const std::string& doc_id, const std::string& attribute,
                      std::span<const TokenId> slot_prefix) {
  const std::string* value = script.find(doc_id, attribute);
  if (value == nullptr || slot_prefix.size() >= value->size()) return tokens::kDelim;
  return static_cast<TokenId>(static_cast<unsigned char>((*value)[slot_prefix.size()]));
}

}  // namespace hpd
