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

// UTF-8 string helpers shared by the loaders, the tokenizer and the
// template matcher.

#ifndef NLEFAITH_TEXT_H_
#define NLEFAITH_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace nlefaith {

// NFC-normalizes UTF-8 text. Invalid UTF-8 is a data error.
std::string NormalizeNfc(std::string_view text);

bool IsAsciiSpace(char c);
std::string_view TrimWhitespace(std::string_view text);

// Unicode-aware lowercase.
std::string ToLower(std::string_view text);

// Lowercase with leading and trailing non-alphanumeric code points removed.
// "`HI-POINTE.'" -> "hi-pointe".
std::string MatchForm(std::string_view token);

// Collapses internal whitespace runs into single spaces and trims the ends.
std::string CollapseWhitespace(std::string_view text);

bool EqualsIgnoreAsciiCase(std::string_view a, std::string_view b);

// Position of the first case-insensitive (ASCII) occurrence of `needle` in
// `haystack` at or after `from`, or npos.
size_t FindIgnoreAsciiCase(std::string_view haystack, std::string_view needle,
                           size_t from = 0);

std::vector<std::string> SplitWhitespace(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// Lines without their terminators ("\n" or "\r\n"); no empty last line
// for text ending in a newline.
std::vector<std::string_view> SplitLines(std::string_view text);

// Uppercases the first code point.
std::string CapitalizeFirst(std::string_view text);

}  // namespace nlefaith

#endif  // NLEFAITH_TEXT_H_
