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

#include <map>
#include <span>
#include <string>
#include <utility>

#include "hpd/tokenizer.hpp"

namespace hpd {

/// Planted values keyed by (document id, attribute name). Drives the mock
/// backend so end-to-end extraction quality is meaningful without training.
class ScriptTable {
 public:
  void set(const std::string& doc_id, const std::string& attribute, std::string value) {
    values_[{doc_id, attribute}] = std::move(value);
  }

  const std::string* find(const std::string& doc_id, const std::string& attribute) const {
    auto it = values_.find({doc_id, attribute});
    return it == values_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return values_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string> values_;
};

/// Next token of the planted value after `slot_prefix.size()` tokens, or DELIM
/// once the value is exhausted or the key is unknown. Only the prefix length
/// is consulted; logits and attention masks play no part.
TokenId scripted_next(const ScriptTable& script, const std::string& doc_id, const std::string& attribute,
                      std::span<const TokenId> slot_prefix);

}  // namespace hpd
