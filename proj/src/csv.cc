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

#include "nlefaith/csv.h"

#include <fstream>
#include <sstream>

#include "nlefaith/error.h"

namespace nlefaith {

namespace {

std::string_view StripBom(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

bool RowIsBlank(const CsvRow& row) {
  return row.size() == 1 && row[0].empty();
}

}  // namespace

std::vector<CsvRow> ParseCsv(std::string_view text, char delimiter) {
  text = StripBom(text);
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string cell;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  size_t i = 0;
  auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
    if (!RowIsBlank(row)) rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        cell.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && cell.empty() && !cell_was_quoted) {
      in_quotes = true;
      cell_was_quoted = true;
    } else if (c == delimiter) {
      row.push_back(std::move(cell));
      cell.clear();
      cell_was_quoted = false;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_row();
      ++i;
    } else if (c == '\n') {
      end_row();
    } else {
      cell.push_back(c);
    }
    ++i;
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted cell");
  if (!cell.empty() || !row.empty() || cell_was_quoted) end_row();
  return rows;
}

std::vector<CsvRow> ParseTsv(std::string_view text) {
  text = StripBom(text);
  std::vector<CsvRow> rows;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    CsvRow row;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      row.emplace_back(line.substr(start, tab == line.npos ? line.npos
                                                           : tab - start));
      if (tab == line.npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string CsvEscape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == cell.npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string CsvLine(const CsvRow& row) {
  std::string out;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += CsvEscape(row[i]);
  }
  out.push_back('\n');
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace nlefaith
