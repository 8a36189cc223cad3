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

#ifndef NLEFAITH_CSV_H_
#define NLEFAITH_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace nlefaith {

using CsvRow = std::vector<std::string>;

// RFC 4180 reader: quoted cells, doubled quotes, embedded newlines, CRLF.
// Blank lines are skipped. A UTF-8 byte-order mark is dropped.
std::vector<CsvRow> ParseCsv(std::string_view text, char delimiter = ',');

// Tab-separated reader without quoting; trailing CR is stripped.
std::vector<CsvRow> ParseTsv(std::string_view text);

std::string CsvEscape(std::string_view cell);
std::string CsvLine(const CsvRow& row);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view content);

}  // namespace nlefaith

#endif  // NLEFAITH_CSV_H_
