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

// Word resources for the random insertion baseline: adjective and adverb
// candidate lists plus a word -> coarse POS table. Tagging is a plain table
// lookup on a token's match form; unknown words are OTHER.

#ifndef NLEFAITH_LEXICON_H_
#define NLEFAITH_LEXICON_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/rng.h"

namespace nlefaith {

enum class Pos : uint8_t { kNoun, kVerb, kAdj, kAdv, kPron, kOther };

Pos ParsePos(std::string_view tag);
std::string_view PosName(Pos pos);

class PosSet {
 public:
  PosSet() = default;

  void Add(Pos p) { bits_ |= Bit(p); }
  bool Has(Pos p) const { return (bits_ & Bit(p)) != 0; }
  bool empty() const { return bits_ == 0; }

  bool operator==(const PosSet&) const = default;

 private:
  static uint8_t Bit(Pos p) { return static_cast<uint8_t>(1u << static_cast<int>(p)); }
  uint8_t bits_ = 0;
};

struct Token {
  std::string text;        // surface form with attached punctuation
  std::string match_form;  // lowercase, edge punctuation stripped
  size_t offset = 0;       // byte offset of `text` in the source string
};

// Whitespace tokenization keeping the original spacing: `leading[i]` is the
// whitespace before token i and `trailing` what follows the last token.
struct Tokens {
  std::vector<Token> tokens;
  std::vector<std::string> leading;
  std::string trailing;

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const Token& operator[](size_t i) const { return tokens[i]; }

  // Byte-exact reconstruction of the tokenized string.
  std::string Join() const;
  std::unordered_set<std::string> MatchForms() const;
};

Tokens Tokenize(std::string_view text);

enum class WordKind { kAdj, kAdv };

class Lexicon {
 public:
  // Lists are lowercased and deduplicated (first occurrence wins). Throws
  // DataError on an empty list or a multi-token entry.
  Lexicon(std::vector<std::string> adjectives, std::vector<std::string> adverbs,
          std::unordered_map<std::string, PosSet> pos_table);

  // Word lists: one word per line. POS file: "word<TAB>TAG" per line; a
  // word may appear on several lines, tags are unioned.
  static Lexicon Load(const std::string& adjectives_path,
                      const std::string& adverbs_path,
                      const std::string& pos_path);

  const std::vector<std::string>& adjectives() const { return adjectives_; }
  const std::vector<std::string>& adverbs() const { return adverbs_; }
  const std::vector<std::string>& Words(WordKind kind) const {
    return kind == WordKind::kAdj ? adjectives_ : adverbs_;
  }

  // Tags of a match form; OTHER for unknown words.
  PosSet Tags(std::string_view match_form) const;
  bool HasTag(std::string_view match_form, Pos pos) const {
    return Tags(match_form).Has(pos);
  }

  size_t pos_table_size() const { return pos_table_.size(); }
  bool Contains(WordKind kind, const std::string& word) const {
    return (kind == WordKind::kAdj ? adjective_set_ : adverb_set_).count(word) >
           0;
  }

 private:
  // Declared before the lists: the list initializers fill them.
  std::unordered_set<std::string> adjective_set_;
  std::unordered_set<std::string> adverb_set_;
  std::vector<std::string> adjectives_;
  std::vector<std::string> adverbs_;
  std::unordered_map<std::string, PosSet> pos_table_;
};

enum class SiteKind { kBeforeNoun, kBeforeVerb };
std::string_view SiteKindName(SiteKind kind);

struct InsertionSite {
  std::string field_name;
  size_t token_index = 0;  // insert before this token
  SiteKind kind = SiteKind::kBeforeNoun;

  bool operator==(const InsertionSite&) const = default;
};

// One BeforeNoun site per NOUN token and one BeforeVerb site per VERB
// token, in token order. A token tagged both yields both (noun first).
std::vector<InsertionSite> FindSites(const Instance& instance,
                                     std::string_view field_name,
                                     const Lexicon& lex);

// `n` words of `kind` drawn uniformly without replacement; once the list is
// exhausted the draw restarts over the full list. Words whose match form is
// in `exclude` are never returned (a DataError if that leaves nothing).
std::vector<std::string> SampleWords(
    const Lexicon& lex, WordKind kind, size_t n, Rng& rng,
    const std::unordered_set<std::string>* exclude = nullptr);

}  // namespace nlefaith

#endif  // NLEFAITH_LEXICON_H_
