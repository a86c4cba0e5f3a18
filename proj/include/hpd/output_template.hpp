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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpd {

/// Text pieces used to render the prompt and the skeleton output.
///
/// Placeholders: `prompt` takes {instruction}, {attributes}, {documents};
/// `attribute` takes {attribute}; `document` takes {id}, {text};
/// `row` takes {attribute} then {value}. The text before {value} is the row
/// prefix (its last token is the slot anchor); the text after it is the row
/// suffix and begins with the value delimiter.
///
/// Template files hold one section per `@@ <name>` header line. A section body
/// is everything up to the next header, minus exactly one trailing newline.
struct OutputTemplate {
  std::string prompt = "{instruction}\nAttributes:\n{attributes}Products:\n{documents}Output:\n";
  std::string attribute = "- {attribute}\n";
  std::string document = "<product id=\"{id}\">{text}</product>\n";
  std::string object_open = "{\n";
  std::string row = "\"{attribute}\": {value}\n";
  std::string object_close = "}\n";

  /// Throws ContractError when a required placeholder is missing.
  void validate() const;

  std::string row_prefix(std::string_view attribute_name) const;
  std::string row_suffix() const;

  /// Text between the attribute name and the value field, e.g. `": `.
  std::string key_separator() const;
  /// Text before the attribute name, e.g. `"`.
  std::string key_opener() const;

  /// Renders one object with filled values; nullopt renders as `null`.
  std::string render_object(const std::vector<std::string>& attributes,
                            const std::vector<std::optional<std::string>>& values) const;

  static OutputTemplate parse(std::string_view text);
  static OutputTemplate load(const std::string& path);
};

std::string replace_all(std::string text, std::string_view from, std::string_view to);

}  // namespace hpd
