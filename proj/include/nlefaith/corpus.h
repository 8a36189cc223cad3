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

// Dataset loading for the three NLE corpora (e-SNLI, CoS-E, ComVE) and the
// normalized JSONL interchange format.
//
// Every loaded instance carries its task's fields in a fixed order:
//   NLI               premise, hypothesis
//   MultiChoiceQA     question, choice1, choice2, choice3
//   CommonsenseChoice sent1, sent2
// Field text is NFC-normalized and trimmed; case is untouched. Labels are
// lowercased.

#ifndef NLEFAITH_CORPUS_H_
#define NLEFAITH_CORPUS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nlefaith {

using Json = nlohmann::ordered_json;

enum class TaskKind { kNli, kMultiChoiceQa, kCommonsenseChoice };

// "nli" | "qa" | "comve".
std::string_view TaskKindName(TaskKind kind);
TaskKind ParseTaskKind(std::string_view name);

const std::vector<std::string>& FieldNames(TaskKind kind);

// Fixed label sets. MultiChoiceQA has none: each instance's labels are its
// lowercased choices.
const std::vector<std::string>& NliLabels();
const std::vector<std::string>& ComveLabels();

struct Instance {
  std::string id;
  TaskKind task = TaskKind::kNli;
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<std::string> label_set;
  std::optional<std::string> gold_label;
  std::optional<std::string> gold_nle;

  // nullptr when the field does not exist.
  const std::string* Field(std::string_view name) const;
  std::string* MutableField(std::string_view name);

  // Throws DataError if `name` is not a field of this instance.
  const std::string& FieldOrThrow(std::string_view name) const;

  bool operator==(const Instance&) const = default;
};

// Checks the per-task invariants (field names and order, non-empty fields,
// label set size, gold label membership). Throws DataError.
void ValidateInstance(const Instance& instance);

struct Dataset {
  TaskKind kind = TaskKind::kNli;
  std::string split = "test";
  // Empty for MultiChoiceQA (per-instance label sets).
  std::vector<std::string> label_set;
  std::vector<Instance> instances;

  const Instance* Find(std::string_view id) const;

  bool operator==(const Dataset&) const = default;
};

enum class SourceFormat { kCsv, kTsv, kJsonl };
SourceFormat ParseSourceFormat(std::string_view name);

// Source column names. Columns in `ignored_columns` may be present and are
// skipped; any other unexpected column is an error.
struct LoaderConfig {
  std::string id_column;
  // NLI
  std::string premise_column;
  std::string hypothesis_column;
  // MultiChoiceQA
  std::string question_column;
  std::string choices_column;
  std::string choices_separator = "|";
  std::string answer_column;
  // CommonsenseChoice
  std::string sent0_column;
  std::string sent1_column;
  std::string false_index_column;
  // Shared
  std::string label_column;
  std::string explanation_column;
  std::vector<std::string> ignored_columns;
};

LoaderConfig DefaultLoaderConfig(TaskKind kind);

// Applies overrides from a JSON object whose keys are LoaderConfig member
// names. Unknown keys are a usage error.
LoaderConfig LoaderConfigFromJson(TaskKind kind, const Json& overrides);

struct RowReject {
  size_t row = 0;  // 1-based data row index (header excluded)
  std::string reason;
};

struct LoadResult {
  Dataset dataset;
  std::vector<RowReject> rejects;
  size_t source_rows = 0;
};

// Rows with missing or empty required cells are rejected and reported; a
// label outside the label set, an unknown column or an unreadable file
// throws DataError.
LoadResult LoadDataset(const std::string& path, TaskKind kind,
                       SourceFormat format, const LoaderConfig& config,
                       const std::string& split = "test");
LoadResult LoadDataset(const std::string& path, TaskKind kind,
                       SourceFormat format);

Json InstanceToJson(const Instance& instance);
// Validates. Fields are reordered into the task's canonical order.
Instance InstanceFromJson(const Json& j);

// One JSON object per line, LF endings, no trailing spaces.
std::string SerializeNormalized(const Dataset& ds);
void ExportNormalized(const Dataset& ds, const std::string& path);

std::string CanonicalLabel(std::string_view label);

}  // namespace nlefaith

#endif  // NLEFAITH_CORPUS_H_
