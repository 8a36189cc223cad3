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

#include "nlefaith/lexicon.h"

#include <unordered_set>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/text.h"

namespace nlefaith {

Pos ParsePos(std::string_view tag) {
  if (tag == "NOUN") return Pos::kNoun;
  if (tag == "VERB") return Pos::kVerb;
  if (tag == "ADJ") return Pos::kAdj;
  if (tag == "ADV") return Pos::kAdv;
  if (tag == "PRON") return Pos::kPron;
  if (tag == "OTHER") return Pos::kOther;
  throw DataError("unknown POS tag '" + std::string(tag) + "'");
}

std::string_view PosName(Pos pos) {
  switch (pos) {
    case Pos::kNoun:
      return "NOUN";
    case Pos::kVerb:
      return "VERB";
    case Pos::kAdj:
      return "ADJ";
    case Pos::kAdv:
      return "ADV";
    case Pos::kPron:
      return "PRON";
    case Pos::kOther:
      return "OTHER";
  }
  return "OTHER";
}

std::string Tokens::Join() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    out += leading[i];
    out += tokens[i].text;
  }
  out += trailing;
  return out;
}

std::unordered_set<std::string> Tokens::MatchForms() const {
  std::unordered_set<std::string> out;
  for (const Token& t : tokens) {
    if (!t.match_form.empty()) out.insert(t.match_form);
  }
  return out;
}

Tokens Tokenize(std::string_view text) {
  Tokens out;
  size_t i = 0;
  while (true) {
    size_t ws_start = i;
    while (i < text.size() && IsAsciiSpace(text[i])) ++i;
    if (i == text.size()) {
      out.trailing = std::string(text.substr(ws_start));
      break;
    }
    size_t start = i;
    while (i < text.size() && !IsAsciiSpace(text[i])) ++i;
    Token t;
    t.text = std::string(text.substr(start, i - start));
    t.match_form = MatchForm(t.text);
    t.offset = start;
    out.leading.emplace_back(text.substr(ws_start, start - ws_start));
    out.tokens.push_back(std::move(t));
  }
  return out;
}

namespace {

std::vector<std::string> CleanList(std::vector<std::string> words,
                                   std::string_view what,
                                   std::unordered_set<std::string>* set) {
  std::vector<std::string> out;
  for (auto& w : words) {
    std::string word = ToLower(TrimWhitespace(w));
    if (word.empty()) continue;
    for (char c : word) {
      if (IsAsciiSpace(c)) {
        throw DataError(std::string(what) + " entry '" + word +
                        "' is not a single token");
      }
    }
    if (set->insert(word).second) out.push_back(std::move(word));
  }
  if (out.empty()) throw DataError(std::string(what) + " list is empty");
  return out;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::vector<std::string> lines;
  std::string text = ReadFile(path);
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

Lexicon::Lexicon(std::vector<std::string> adjectives,
                 std::vector<std::string> adverbs,
                 std::unordered_map<std::string, PosSet> pos_table)
    : adjectives_(CleanList(std::move(adjectives), "adjective", &adjective_set_)),
      adverbs_(CleanList(std::move(adverbs), "adverb", &adverb_set_)),
      pos_table_(std::move(pos_table)) {}

Lexicon Lexicon::Load(const std::string& adjectives_path,
                      const std::string& adverbs_path,
                      const std::string& pos_path) {
  std::unordered_map<std::string, PosSet> table;
  std::vector<std::string> lines = ReadLines(pos_path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (TrimWhitespace(line).empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(pos_path + ":" + std::to_string(i + 1) +
                      ": malformed POS line (expected word<TAB>TAG)");
    }
    std::string word = ToLower(line.substr(0, tab));
    Pos pos;
    try {
      pos = ParsePos(TrimWhitespace(std::string_view(line).substr(tab + 1)));
    } catch (const Error& e) {
      throw DataError(pos_path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    table[word].Add(pos);
  }
  return Lexicon(ReadLines(adjectives_path), ReadLines(adverbs_path),
                 std::move(table));
}

PosSet Lexicon::Tags(std::string_view match_form) const {
  auto it = pos_table_.find(std::string(match_form));
  if (it != pos_table_.end()) return it->second;
  PosSet other;
  other.Add(Pos::kOther);
  return other;
}

std::string_view SiteKindName(SiteKind kind) {
  return kind == SiteKind::kBeforeNoun ? "before-noun" : "before-verb";
}

std::vector<InsertionSite> FindSites(const Instance& instance,
                                     std::string_view field_name,
                                     const Lexicon& lex) {
  Tokens tokens = Tokenize(instance.FieldOrThrow(field_name));
  std::vector<InsertionSite> sites;
  for (size_t i = 0; i < tokens.size(); ++i) {
    PosSet tags = lex.Tags(tokens[i].match_form);
    if (tags.Has(Pos::kNoun)) {
      sites.push_back({std::string(field_name), i, SiteKind::kBeforeNoun});
    }
    if (tags.Has(Pos::kVerb)) {
      sites.push_back({std::string(field_name), i, SiteKind::kBeforeVerb});
    }
  }
  return sites;
}

std::vector<std::string> SampleWords(
    const Lexicon& lex, WordKind kind, size_t n, Rng& rng,
    const std::unordered_set<std::string>* exclude) {
  if (n == 0) throw UsageError("SampleWords: n must be >= 1");
  const std::vector<std::string>& words = lex.Words(kind);
  if (words.empty()) throw DataError("empty word list");
  size_t excluded = 0;
  if (exclude != nullptr) {
    for (const auto& w : *exclude) {
      if (lex.Contains(kind, w)) ++excluded;
    }
  }
  const size_t allowed = words.size() - excluded;
  if (allowed == 0) {
    throw DataError("every candidate word already occurs in the text");
  }
  std::vector<std::string> out;
  out.reserve(n);
  std::unordered_set<size_t> drawn;
  while (out.size() < n) {
    if (drawn.size() == allowed) drawn.clear();
    size_t i = static_cast<size_t>(rng.Below(words.size()));
    if (drawn.count(i)) continue;
    if (exclude != nullptr && exclude->count(words[i])) continue;
    drawn.insert(i);
    out.push_back(words[i]);
  }
  return out;
}

}  // namespace nlefaith
