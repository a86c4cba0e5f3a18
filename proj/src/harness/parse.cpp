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

#include "hpd/harness/parse.hpp"

#include <algorithm>

namespace hpd::harness {

namespace {

void warn(ParsedOutput& out, std::string msg) {
  ++out.warnings;
  out.messages.push_back(std::move(msg));
}

}  // namespace

ParsedOutput parse_ar_output(std::string_view text, const SkeletonLayout& layout) {
  const auto& fmt = layout.format;
  const std::string opener = fmt.key_opener();
  const std::string separator = fmt.key_separator();
  std::string suffix = fmt.row_suffix();
  if (suffix.empty()) suffix = "\n";

  ParsedOutput out;
  for (const auto& id : layout.doc_ids) {
    auto& row = out.values[id];
    for (const auto& a : layout.attributes) row[a] = std::nullopt;
  }

  std::size_t cursor = 0;
  for (const auto& id : layout.doc_ids) {
    const std::string open = replace_all(fmt.object_open, "{id}", id);
    const std::string close = replace_all(fmt.object_close, "{id}", id);
    const std::size_t start = text.find(open, cursor);
    if (start == std::string_view::npos) {
      warn(out, "object for '" + id + "' not found");
      break;
    }
    std::size_t pos = start + open.size();
    bool closed = false;
    while (pos < text.size()) {
      if (!close.empty() && text.substr(pos).starts_with(close)) {
        pos += close.size();
        closed = true;
        break;
      }
      const std::size_t end = text.find(suffix, pos);
      if (end == std::string_view::npos) {
        warn(out, "incomplete row dropped in object '" + id + "'");
        pos = text.size();
        break;
      }
      std::string_view line = text.substr(pos, end - pos);
      pos = end + suffix.size();
      if (!opener.empty()) {
        const auto o = line.find(opener);
        if (o == std::string_view::npos) {
          warn(out, "row without key opener in object '" + id + "'");
          continue;
        }
        line.remove_prefix(o + opener.size());
      }
      const auto sep = line.find(separator);
      if (sep == std::string_view::npos) {
        warn(out, "row without key separator in object '" + id + "'");
        continue;
      }
      const std::string attr(line.substr(0, sep));
      auto& row = out.values[id];
      if (!row.contains(attr)) {
        warn(out, "unknown attribute '" + attr + "' in object '" + id + "'");
        continue;
      }
      row[attr] = clean_value(line.substr(sep + separator.size()));
    }
    cursor = pos;
    if (!closed) {
      warn(out, "object '" + id + "' is not closed");
      break;
    }
  }
  return out;
}

ParsedOutput parse_hpd_output(const ExtractionResult& result) {
  ParsedOutput out;
  for (const auto& e : result.entries) out.values[e.doc_id][e.attribute] = e.value;
  return out;
}

void merge_parsed(ParsedOutput& into, ParsedOutput&& part) {
  for (auto& [doc, row] : part.values) {
    auto& dst = into.values[doc];
    for (auto& [attr, value] : row) dst[attr] = std::move(value);
  }
  into.warnings += part.warnings;
  into.messages.insert(into.messages.end(), std::make_move_iterator(part.messages.begin()),
                       std::make_move_iterator(part.messages.end()));
}

}  // namespace hpd::harness
