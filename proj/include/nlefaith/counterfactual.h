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

// Counterfactual insertion test.
//
// An intervention splices a contiguous word sequence W into one field of an
// instance. If the model's prediction on the edited input flips and none of
// W's match forms appears among the match forms of the new explanation, the
// explanation is judged unfaithful.

#ifndef NLEFAITH_COUNTERFACTUAL_H_
#define NLEFAITH_COUNTERFACTUAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/lexicon.h"
#include "nlefaith/model_protocol.h"

namespace nlefaith {

enum class TargetMode { kAnyFlip, kPerTargetLabel };
std::string_view TargetModeName(TargetMode mode);
TargetMode ParseTargetMode(std::string_view name);

enum class Provenance { kRand, kEdit, kExternal };
std::string_view ProvenanceName(Provenance p);
Provenance ParseProvenance(std::string_view name);

// Default editable fields: NLI hypothesis, QA question, ComVE both sentences.
const std::vector<std::string>& DefaultEditableFields(TaskKind kind);

struct EditorConfig {
  int n_positions = 4;
  int n_candidates = 4;
  int max_insert_len = 1;
  // Per-task override of DefaultEditableFields.
  std::map<TaskKind, std::vector<std::string>> editable_fields;
  TargetMode target_mode = TargetMode::kAnyFlip;
  uint64_t seed = 0;
  // Search editor only: vocabulary entries scored per insertion point
  // (0 scores the whole vocabulary).
  int search_pool = 64;

  const std::vector<std::string>& FieldsFor(TaskKind kind) const;
};

EditorConfig DefaultRandomConfig();
EditorConfig DefaultSearchConfig();

// Throws UsageError on out-of-range values.
void ValidateEditorConfig(const EditorConfig& cfg);

Json EditorConfigToJson(const EditorConfig& cfg);
// Missing keys keep the values of `base`.
EditorConfig EditorConfigFromJson(const Json& j, const EditorConfig& base);

struct Intervention {
  std::string instance_id;
  std::string field_name;
  size_t token_index = 0;  // insert before this token
  std::vector<std::string> words;
  std::optional<std::string> target_label;
  Provenance provenance = Provenance::kRand;
  // Set by the random baseline.
  std::optional<SiteKind> site_kind;

  bool operator==(const Intervention&) const = default;
};

Json InterventionToJson(const Intervention& iv);
Intervention InterventionFromJson(const Json& j);

// Throws DataError unless `iv` targets this instance, names an existing
// field, has 1..3 whitespace-free words, a token index inside the field and
// no word whose match form already occurs in the field.
void ValidateIntervention(const Instance& instance, const Intervention& iv);

// Splices W before token `token_index`, joined and followed by single
// spaces. Other fields are untouched.
Instance ApplyIntervention(const Instance& instance, const Intervention& iv);
// Inverse of ApplyIntervention; throws DataError if the span is not there.
Instance RemoveIntervention(const Instance& perturbed, const Intervention& iv);

// True iff some word of W has the match form of some token of `nle`.
bool Overlap(const std::vector<std::string>& words, std::string_view nle);

// Random baseline: up to n_positions distinct insertion gaps before nouns
// or verbs sampled without replacement, n_candidates adjectives (before
// nouns) or adverbs (before verbs) per gap. A gap before a token tagged both
// takes one kind at random. Seeded by (cfg.seed, instance id). In per-target-label
// mode the list is repeated once per target label.
std::vector<Intervention> RandomInterventions(const Instance& instance,
                                              const Lexicon& lex,
                                              const EditorConfig& cfg,
                                              const std::string& original_label);

// A search vocabulary entry: one to three words.
using Phrase = std::vector<std::string>;

// Lexicon adjectives and adverbs followed by the `top_k` most frequent
// dataset content words not already in the lists (count descending, then
// lexicographic).
std::vector<Phrase> BuildSearchVocabulary(const Lexicon& lex,
                                          const Dataset& dataset, size_t top_k);
// One phrase per line.
std::vector<Phrase> LoadVocabulary(const std::string& path);

// Search editor. Samples n_positions insertion points over the editable
// fields, scores up to search_pool vocabulary phrases per point with
// Predict, and keeps the n_candidates best per point. Candidates are ranked
// by probability mass off the original label (any-flip) or on the target
// label (per-target-label, targets in label-set order), score descending,
// ties broken by phrase then by point order. Without scores the candidates
// keep vocabulary order.
std::vector<Intervention> SearchInterventions(const Instance& instance,
                                              const std::vector<Phrase>& vocab,
                                              const EditorConfig& cfg,
                                              Endpoint& endpoint,
                                              const ModelOutput& original);

struct CounterfactualRecord {
  std::string instance_id;
  Provenance provenance = Provenance::kRand;
  ModelOutput original;
  std::optional<Intervention> intervention;
  std::optional<ModelOutput> perturbed_output;
  bool flipped = false;
  bool overlap = false;
  bool unfaithful = false;
  // Model queries up to and including the verdict.
  size_t trials = 0;
  size_t n_interventions = 0;
  bool errored = false;
  std::string error;
  // "yes"/"no" once audited.
  std::optional<std::string> paraphrase_present;

  bool operator==(const CounterfactualRecord&) const = default;
};

inline constexpr std::string_view kCounterfactualSchema =
    "nlefaith.counterfactual/1";

Json CounterfactualRecordToJson(const CounterfactualRecord& r);
CounterfactualRecord CounterfactualRecordFromJson(const Json& j);

// Evaluates the interventions in order and selects the first flip: a
// prediction different from the original label that also equals the
// intervention's target label when it has one. The chosen one is re-queried
// with Infer for its explanation. Transport failures produce an errored
// record; conformance failures propagate.
CounterfactualRecord RunCounterfactual(
    const Instance& instance, const ModelOutput& original,
    const std::vector<Intervention>& interventions, Endpoint& endpoint,
    Provenance provenance);

// External interventions, one JSON object per line.
std::vector<Intervention> LoadInterventions(const std::string& path);

std::string SerializeRecords(const std::vector<CounterfactualRecord>& records);
std::vector<CounterfactualRecord> LoadCounterfactualRecords(
    const std::string& path);

}  // namespace nlefaith

#endif  // NLEFAITH_COUNTERFACTUAL_H_
