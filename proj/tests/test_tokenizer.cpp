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

#include <gtest/gtest.h>

#include "hpd/output_template.hpp"
#include "hpd/tokenizer.hpp"
#include "hpd/errors.hpp"

namespace hpd {
namespace {

TEST(Tokenizer, BytesMapToTheirValues) {
  const TokenSeq t = tokenize("A:\xff\n");
  EXPECT_EQ(t, (TokenSeq{65, 58, 255, tokens::kDelim}));
}

TEST(Tokenizer, RoundTripsEveryByte) {
  std::string all;
  for (int b = 0; b < 256; ++b) all += static_cast<char>(b);
  EXPECT_EQ(detokenize(tokenize(all)), all);
}

TEST(Tokenizer, DetokenizeDropsControlTokensButKeepsDelim) {
  const TokenSeq t{tokens::kBos, 'a', tokens::kPad, tokens::kDelim, 'b'};
  EXPECT_EQ(detokenize(t), "a\nb");
}

TEST(OutputTemplate, SplitsRowAroundValue) {
  OutputTemplate t;
  EXPECT_EQ(t.row_prefix("Brand"), "\"Brand\": ");
  EXPECT_EQ(t.row_suffix(), "\n");
  EXPECT_EQ(t.key_opener(), "\"");
  EXPECT_EQ(t.key_separator(), "\": ");
}

TEST(OutputTemplate, RendersNullForMissingValues) {
  OutputTemplate t;
  EXPECT_EQ(t.render_object({"A", "B"}, {std::string("x"), std::nullopt}), "{\n\"A\": x\n\"B\": null\n}\n");
}

TEST(OutputTemplate, ParsesSectionsAndKeepsDefaultsForOthers) {
  const auto t = OutputTemplate::parse("@@ row\n{attribute}={value}\n\n@@ object_close\n]\n");
  EXPECT_EQ(t.row, "{attribute}={value}\n");
  EXPECT_EQ(t.object_close, "]");
  EXPECT_EQ(t.object_open, OutputTemplate{}.object_open);
}

TEST(OutputTemplate, RejectsRowWithoutValue) {
  OutputTemplate t;
  t.row = "{attribute}\n";
  EXPECT_THROW(t.validate(), ContractError);
}

TEST(OutputTemplate, RowSuffixMustStartWithDelimiter) {
  OutputTemplate t;
  t.row = "{attribute}={value};\n";
  EXPECT_THROW(t.validate(), ContractError);
}

}  // namespace
}  // namespace hpd
