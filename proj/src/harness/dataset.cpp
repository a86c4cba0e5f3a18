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

#include "hpd/harness/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hpd/errors.hpp"

namespace hpd::harness {

namespace {

std::string string_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

}  // namespace

std::vector<DatasetRecord> parse_jsonl(std::string_view text) {
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);

    DatasetRecord r;
    r.id = string_field(obj, "id", line_no);
    r.category = string_field(obj, "category", line_no);
    r.text = string_field(obj, "text", line_no);
    if (r.id.empty()) throw ParseError("empty id", line_no);
    if (auto it = obj.find("labels"); it != obj.end() && !it->is_null()) {
      if (!it->is_object()) throw ParseError("field 'labels' must be an object", line_no);
      r.labels.emplace();
      for (const auto& [attr, value] : it->items()) {
        if (value.is_null()) r.labels->emplace_back(attr, std::nullopt);
        else if (value.is_string()) r.labels->emplace_back(attr, value.get<std::string>());
        else throw ParseError("label '" + attr + "' must be a string or null", line_no);
      }
    }
    for (const auto& [key, value] : obj.items()) {
      if (key != "id" && key != "category" && key != "text" && key != "labels") r.extra[key] = value;
    }
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate id '" + r.id + "' on line " + std::to_string(line_no));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<DatasetRecord> load_jsonl(const std::string& path) { return parse_jsonl(read_file(path)); }

std::string to_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json obj;
    obj["id"] = r.id;
    obj["category"] = r.category;
    obj["text"] = r.text;
    if (r.labels) {
      json labels = json::object();
      for (const auto& [attr, value] : *r.labels) labels[attr] = value ? json(*value) : json(nullptr);
      obj["labels"] = labels;
    }
    for (const auto& [key, value] : r.extra.items()) obj[key] = value;
    out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void save_jsonl(const std::string& path, const std::vector<DatasetRecord>& records) {
  write_file(path, to_jsonl(records));
}

ValueTable gold_labels(const std::vector<DatasetRecord>& records) {
  ValueTable gold;
  for (const auto& r : records) {
    if (!r.labels) continue;
    auto& row = gold[r.id];
    for (const auto& [attr, value] : *r.labels) row[attr] = value;
  }
  return gold;
}

std::vector<AttributeSet> derive_attribute_sets(const std::vector<DatasetRecord>& records) {
  std::vector<AttributeSet> sets;
  for (const auto& r : records) {
    auto it = std::find_if(sets.begin(), sets.end(), [&](const AttributeSet& s) { return s.category == r.category; });
    if (it == sets.end()) {
      sets.push_back({r.category, {}});
      it = sets.end() - 1;
    }
    if (!r.labels) continue;
    for (const auto& [attr, value] : *r.labels) {
      if (std::find(it->attributes.begin(), it->attributes.end(), attr) == it->attributes.end()) {
        it->attributes.push_back(attr);
      }
    }
  }
  return sets;
}

std::vector<AttributeSet> load_attribute_sets(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError(path + ": expected an object of category -> attribute list", 0);
  std::vector<AttributeSet> sets;
  for (const auto& [category, list] : j.items()) {
    if (!list.is_array()) throw ParseError(path + ": attributes of '" + category + "' must be a list", 0);
    AttributeSet s{category, {}};
    for (const auto& a : list) {
      if (!a.is_string()) throw ParseError(path + ": attribute names must be strings", 0);
      s.attributes.push_back(a.get<std::string>());
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

const AttributeSet& find_attribute_set(const std::vector<AttributeSet>& sets, const std::string& category) {
  for (const auto& s : sets) {
    if (s.category == category) return s;
  }
  throw ValidationError("no attribute set for category '" + category + "'");
}

void validate_records(const std::vector<DatasetRecord>& records, const std::vector<AttributeSet>& sets) {
  for (const auto& r : records) {
    const AttributeSet& set = find_attribute_set(sets, r.category);
    require<ValidationError>(!set.attributes.empty(), "category '" + r.category + "' has no attributes");
    if (!r.labels) continue;
    for (const auto& [attr, value] : *r.labels) {
      if (std::find(set.attributes.begin(), set.attributes.end(), attr) == set.attributes.end()) {
        throw ValidationError("record '" + r.id + "' labels attribute '" + attr + "' outside category '" +
                              r.category + "'");
      }
    }
  }
}

json values_to_json(const ValueTable& values) {
  json out = json::object();
  for (const auto& [doc, row] : values) {
    json obj = json::object();
    for (const auto& [attr, value] : row) obj[attr] = value ? json(*value) : json(nullptr);
    out[doc] = obj;
  }
  return out;
}

ValueTable values_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("results must be a JSON object", 0);
  ValueTable out;
  for (const auto& [doc, row] : j.items()) {
    if (doc.starts_with("_")) continue;
    if (!row.is_object()) throw ParseError("results for '" + doc + "' must be an object", 0);
    auto& dst = out[doc];
    for (const auto& [attr, value] : row.items()) {
      if (value.is_null()) dst[attr] = std::nullopt;
      else if (value.is_string()) dst[attr] = value.get<std::string>();
      else throw ParseError("value of '" + doc + "'/'" + attr + "' must be a string or null", 0);
    }
  }
  return out;
}

void save_results(const std::string& path, const ValueTable& values, const json& trace) {
  json out = values_to_json(values);
  if (!trace.is_null()) out["_trace"] = trace;
  // Decoded values are raw bytes; invalid UTF-8 becomes U+FFFD.
  write_file(path, out.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

ValueTable load_results(const std::string& path) {
  try {
    return values_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace hpd::harness
