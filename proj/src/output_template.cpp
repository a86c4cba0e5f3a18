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

#include "hpd/output_template.hpp"

#include <fstream>
#include <sstream>

#include "hpd/errors.hpp"

namespace hpd {

namespace {

constexpr std::string_view kAttr = "{attribute}";
constexpr std::string_view kValue = "{value}";

}  // namespace

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  if (from.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

void OutputTemplate::validate() const {
  const auto attr = row.find(kAttr);
  const auto value = row.find(kValue);
  require<ContractError>(attr != std::string::npos && value != std::string::npos && attr < value,
                         "template row needs {attribute} followed by {value}");
  require<ContractError>(row.find(kValue, value + 1) == std::string::npos, "template row has two {value} fields");
  require<ContractError>(!row_prefix("x").empty(), "template row prefix is empty");
  require<ContractError>(row_suffix().starts_with('\n'), "template row must end the value with a newline");
}

std::string OutputTemplate::row_prefix(std::string_view attribute_name) const {
  return replace_all(row.substr(0, row.find(kValue)), kAttr, attribute_name);
}

std::string OutputTemplate::row_suffix() const {
  const auto value = row.find(kValue);
  return value == std::string::npos ? std::string() : row.substr(value + kValue.size());
}

std::string OutputTemplate::key_separator() const {
  const auto attr = row.find(kAttr);
  const auto value = row.find(kValue);
  return row.substr(attr + kAttr.size(), value - attr - kAttr.size());
}

std::string OutputTemplate::key_opener() const { return row.substr(0, row.find(kAttr)); }

std::string OutputTemplate::render_object(const std::vector<std::string>& attributes,
                                          const std::vector<std::optional<std::string>>& values) const {
  require<ContractError>(attributes.size() == values.size(), "render_object: attribute/value count mismatch");
  std::string out = object_open;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    out += row_prefix(attributes[i]);
    out += values[i] ? *values[i] : std::string("null");
    out += row_suffix();
  }
  out += object_close;
  return out;
}

OutputTemplate OutputTemplate::parse(std::string_view text) {
  OutputTemplate t;
  std::string current;
  std::string body;
  bool in_section = false;
  auto flush = [&]() {
    if (!in_section) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (current == "prompt") t.prompt = body;
    else if (current == "attribute") t.attribute = body;
    else if (current == "document") t.document = body;
    else if (current == "object_open") t.object_open = body;
    else if (current == "row") t.row = body;
    else if (current == "object_close") t.object_close = body;
    else throw ParseError("unknown template section '" + current + "'", 0);
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    const bool last = eol == std::string_view::npos;
    std::string_view line = text.substr(pos, last ? std::string_view::npos : eol - pos);
    if (line.starts_with("@@ ")) {
      flush();
      current = std::string(line.substr(3));
      while (!current.empty() && (current.back() == ' ' || current.back() == '\r')) current.pop_back();
      body.clear();
      in_section = true;
    } else if (in_section) {
      body += line;
      if (!last) body += '\n';
    }
    if (last) break;
    pos = eol + 1;
  }
  flush();
  t.validate();
  return t;
}

OutputTemplate OutputTemplate::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace hpd
