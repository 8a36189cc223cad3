//
// Copyright 2026 The nlefaith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "nlefaith/text.h"

#include <gtest/gtest.h>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"

namespace nlefaith {
namespace {

TEST(TextTest, NfcComposesDecomposedInput) {
  EXPECT_EQ(NormalizeNfc("cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(NormalizeNfc("plain"), "plain");
}

TEST(TextTest, NfcRejectsInvalidUtf8) {
  EXPECT_THROW(NormalizeNfc("bad\xFF"), Error);
}

TEST(TextTest, MatchFormStripsEdgesAndLowercases) {
  EXPECT_EQ(MatchForm("HI-POINTE.'"), "hi-pointe");
  EXPECT_EQ(MatchForm("suit."), "suit");
  EXPECT_EQ(MatchForm("\"Blue,"), "blue");
  EXPECT_EQ(MatchForm("..."), "");
  EXPECT_EQ(MatchForm("\xC3\x89T\xC3\x89!"), "\xC3\xA9t\xC3\xA9");
}

TEST(TextTest, CollapseWhitespace) {
  EXPECT_EQ(CollapseWhitespace("  a \t b\n\nc "), "a b c");
}

TEST(TextTest, CaseInsensitiveSearch) {
  EXPECT_TRUE(EqualsIgnoreAsciiCase("Just Because", "just because"));
  EXPECT_FALSE(EqualsIgnoreAsciiCase("just", "justice"));
  EXPECT_EQ(FindIgnoreAsciiCase("People ARE talking", "are"), 7u);
  EXPECT_EQ(FindIgnoreAsciiCase("abc", "d"), std::string_view::npos);
}

TEST(TextTest, SplitLinesDropsCarriageReturns) {
  auto lines = SplitLines("a\r\nb\n\nc\n");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
}

TEST(TextTest, CapitalizeFirst) {
  EXPECT_EQ(CapitalizeFirst("people are talking"), "People are talking");
  EXPECT_EQ(CapitalizeFirst("\xC3\xA9t\xC3\xA9"), "\xC3\x89t\xC3\xA9");
  EXPECT_EQ(CapitalizeFirst(""), "");
}

TEST(CsvTest, RoundTripsQuotesCommasAndNewlines) {
  std::vector<CsvRow> rows = {{"id", "text"},
                              {"1", "plain"},
                              {"2", "with, comma"},
                              {"3", "with \"quotes\""},
                              {"4", "multi\nline"},
                              {"5", ""}};
  std::string text;
  for (const auto& r : rows) text += CsvLine(r);
  EXPECT_EQ(ParseCsv(text), rows);
}

TEST(CsvTest, TsvAndCrLf) {
  auto rows = ParseTsv("a\tb\r\n1\t2\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (CsvRow{"1", "2"}));
}

TEST(CsvTest, UnterminatedQuoteIsDataError) {
  try {
    ParseCsv("a,\"b\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

}  // namespace
}  // namespace nlefaith
