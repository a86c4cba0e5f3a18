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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hpd/scheduler.hpp"

namespace hpd::harness {

using json = nlohmann::ordered_json;

/// doc id -> attribute -> value (nullopt for null).
using ValueTable = std::map<std::string, std::map<std::string, std::optional<std::string>>>;

struct DatasetRecord {
  std::string id;
  std::string category;
  std::string text;
  /// Label order is kept; it seeds attribute order when sets are derived.
  std::optional<std::vector<std::pair<std::string, std::optional<std::string>>>> labels;
  /// Fields other than id/category/text/labels, written back unchanged.
  json extra = json::object();

  Document document() const { return {id, category, text}; }
};

std::vector<DatasetRecord> parse_jsonl(std::string_view text);
std::vector<DatasetRecord> load_jsonl(const std::string& path);
std::string to_jsonl(const std::vector<DatasetRecord>& records);
void save_jsonl(const std::string& path, const std::vector<DatasetRecord>& records);

/// Gold values of every labelled record.
ValueTable gold_labels(const std::vector<DatasetRecord>& records);

/// One set per category, in order of first appearance; attribute order is the
/// order of first appearance across that category's labels.
std::vector<AttributeSet> derive_attribute_sets(const std::vector<DatasetRecord>& records);

/// `{"category": ["attr", ...], ...}`.
std::vector<AttributeSet> load_attribute_sets(const std::string& path);

/// Every record's category has a set and its label keys belong to it.
void validate_records(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets);

const AttributeSet& find_attribute_set(const std::vector<AttributeSet>& sets, const std::string& category);

json values_to_json(const ValueTable& values);
ValueTable values_from_json(const json& j);

/// `{"doc_id": {"attr": value|null, ...}, "_trace": {...}}`.
void save_results(const std::string& path, const ValueTable& values, const json& trace = json());
ValueTable load_results(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace hpd::harness
