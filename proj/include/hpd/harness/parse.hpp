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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hpd/engine.hpp"
#include "hpd/harness/dataset.hpp"
#include "hpd/scheduler.hpp"

namespace hpd::harness {

struct ParsedOutput {
  ValueTable values;  // one entry per (doc, attribute) of the layout
  std::size_t warnings = 0;
  std::vector<std::string> messages;
};

/// Lenient reader for AR text in the layout's template. Complete rows are
/// kept; a row cut off before its delimiter is dropped with a warning, as are
/// rows with unknown attribute names. Pairs never seen come back null.
ParsedOutput parse_ar_output(std::string_view text, const SkeletonLayout& layout);

ParsedOutput parse_hpd_output(const ExtractionResult& result);

/// Adds `part` into `into`, keeping warnings and messages.
void merge_parsed(ParsedOutput& into, ParsedOutput&& part);

}  // namespace hpd::harness
