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

// Input reconstruction test.
//
// The reasons stated in an explanation are turned back into a model input.
// NLI inputs are rebuilt from explanation templates such as
// "<X> is the same as <Y>" (X becomes the premise, Y the hypothesis);
// ComVE inputs by putting the explanation in place of the sensible
// sentence. A prediction on the rebuilt input that differs from the expected
// label marks the explanation unfaithful.

#ifndef NLEFAITH_RECONSTRUCTION_H_
#define NLEFAITH_RECONSTRUCTION_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/lexicon.h"
#include "nlefaith/model_protocol.h"

namespace nlefaith {

// A pattern with one or two slots written <X> and <Y>, e.g.
// "just because <X> does not mean <Y>". Literals are compared ASCII
// case-insensitively and with whitespace runs collapsed.
struct NleTemplate {
  std::string id;
  std::string pattern;
  bool reconstructable = true;
  std::optional<std::string> label_scope;

  // Filled by ParseTemplate: literals.size() == slots.size() + 1.
  std::vector<std::string> literals;
  std::vector<std::string> slots;  // "X", "Y" in pattern order

  size_t LiteralLength() const;
};

// Throws DataError on a pattern without slots, with more than two, with an
// unknown or repeated slot name, or with adjacent slots.
NleTemplate ParseTemplate(std::string id, std::string_view pattern,
                          bool reconstructable = true,
                          std::optional<std::string> label_scope = std::nullopt);

// JSONL: {"id": str, "pattern": str, "reconstructable": bool,
// "label_scope": str|null}. Ids must be unique.
std::vector<NleTemplate> LoadTemplates(const std::string& path);
std::vector<NleTemplate> ParseTemplates(std::string_view jsonl);

// Substitutes the slots (used for roundtrip checks).
std::string RenderTemplate(const NleTemplate& t, std::string_view x,
                           std::string_view y);

struct TemplateMatch {
  std::string template_id;
  bool reconstructable = true;
  std::string x;
  std::optional<std::string> y;

  bool operator==(const TemplateMatch&) const = default;
};

// Tries templates from the longest total literal length down (file order on
// ties), skipping those whose label_scope differs from `label` when both are
// set. The match is anchored at both ends after trailing terminal
// punctuation is dropped from the explanation; each capture is the shortest
// non-empty span that lets the remaining literals match, trimmed of
// whitespace and trailing punctuation.
std::optional<TemplateMatch> MatchTemplate(
    std::string_view nle, const std::vector<NleTemplate>& templates,
    const std::optional<std::string>& label = std::nullopt);

// At least one NOUN or PRON token and at least one VERB token.
bool IsSentenceLike(std::string_view span, const Lexicon& lex);

// "people are talking" -> "People are talking."
std::string SentenceCase(std::string_view span);

struct EsnliReconstruction {
  std::optional<TemplateMatch> match;
  // Set when a reconstructable template matched and both captures are
  // sentence-like.
  std::optional<Instance> instance;
};

EsnliReconstruction ReconstructEsnli(const Instance& instance,
                                     std::string_view nle,
                                     const std::vector<NleTemplate>& templates,
                                     const Lexicon& lex,
                                     const std::optional<std::string>& label =
                                         std::nullopt);

struct ComveReconstruction {
  Instance instance;
  // Slot label of the sentence the model judged against common sense.
  std::string expected_label;
};

// Replaces the sentence the model did not pick with the explanation.
// Throws DataError on an empty explanation or a non-ComVE instance.
ComveReconstruction ReconstructComve(const Instance& instance,
                                     const ModelOutput& original);

struct ReconstructionRecord {
  std::string instance_id;
  bool reconstructable = false;
  std::optional<std::string> template_id;
  std::optional<Instance> reconstructed;
  std::string original_label;
  std::string original_nle;
  std::optional<std::string> expected_label;
  std::optional<std::string> reconstructed_label;
  std::optional<bool> unfaithful;
  bool errored = false;
  std::string error;

  bool operator==(const ReconstructionRecord&) const = default;
};

inline constexpr std::string_view kReconstructionSchema =
    "nlefaith.reconstruction/1";

Json ReconstructionRecordToJson(const ReconstructionRecord& r);
ReconstructionRecord ReconstructionRecordFromJson(const Json& j);

// NLI and ComVE only (DataError for QA). Transport failures produce an
// errored record; conformance failures propagate.
ReconstructionRecord RunReconstruction(const Instance& instance,
                                       const ModelOutput& original,
                                       Endpoint& endpoint,
                                       const std::vector<NleTemplate>& templates,
                                       const Lexicon& lex);

std::string SerializeRecords(const std::vector<ReconstructionRecord>& records);
std::vector<ReconstructionRecord> LoadReconstructionRecords(
    const std::string& path);

}  // namespace nlefaith

#endif  // NLEFAITH_RECONSTRUCTION_H_
