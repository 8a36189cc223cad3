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

#include "nlefaith/corpus.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/text.h"

namespace nlefaith {

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kNli:
      return "nli";
    case TaskKind::kMultiChoiceQa:
      return "qa";
    case TaskKind::kCommonsenseChoice:
      return "comve";
  }
  return "nli";
}

TaskKind ParseTaskKind(std::string_view name) {
  std::string n = ToLower(name);
  if (n == "nli" || n == "esnli" || n == "e-snli") return TaskKind::kNli;
  if (n == "qa" || n == "cose" || n == "cos-e") return TaskKind::kMultiChoiceQa;
  if (n == "comve") return TaskKind::kCommonsenseChoice;
  throw UsageError("unknown task kind '" + std::string(name) +
                   "' (expected nli, qa or comve)");
}

const std::vector<std::string>& FieldNames(TaskKind kind) {
  static const std::vector<std::string> kNli = {"premise", "hypothesis"};
  static const std::vector<std::string> kQa = {"question", "choice1",
                                               "choice2", "choice3"};
  static const std::vector<std::string> kComve = {"sent1", "sent2"};
  switch (kind) {
    case TaskKind::kNli:
      return kNli;
    case TaskKind::kMultiChoiceQa:
      return kQa;
    case TaskKind::kCommonsenseChoice:
      return kComve;
  }
  return kNli;
}

const std::vector<std::string>& NliLabels() {
  static const std::vector<std::string> kLabels = {"entailment", "neutral",
                                                   "contradiction"};
  return kLabels;
}

const std::vector<std::string>& ComveLabels() {
  static const std::vector<std::string> kLabels = {"first sentence",
                                                   "second sentence"};
  return kLabels;
}

std::string CanonicalLabel(std::string_view label) {
  return ToLower(TrimWhitespace(label));
}

const std::string* Instance::Field(std::string_view name) const {
  for (const auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string* Instance::MutableField(std::string_view name) {
  for (auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

const std::string& Instance::FieldOrThrow(std::string_view name) const {
  const std::string* f = Field(name);
  if (f == nullptr) {
    throw DataError("instance '" + id + "' has no field '" +
                    std::string(name) + "'");
  }
  return *f;
}

const Instance* Dataset::Find(std::string_view id) const {
  for (const Instance& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

namespace {

size_t ExpectedLabelCount(TaskKind kind) {
  return kind == TaskKind::kCommonsenseChoice ? 2 : 3;
}

// Structural checks except gold-label membership.
void ValidateShape(const Instance& inst) {
  if (inst.id.empty()) throw DataError("instance id is empty");
  const auto& names = FieldNames(inst.task);
  if (inst.fields.size() != names.size()) {
    throw DataError("instance '" + inst.id + "': expected " +
                    std::to_string(names.size()) + " fields");
  }
  for (size_t i = 0; i < names.size(); ++i) {
    if (inst.fields[i].first != names[i]) {
      throw DataError("instance '" + inst.id + "': unexpected field '" +
                      inst.fields[i].first + "'");
    }
    if (TrimWhitespace(inst.fields[i].second).empty()) {
      throw DataError("instance '" + inst.id + "': field '" + names[i] +
                      "' is empty");
    }
  }
  if (inst.label_set.size() != ExpectedLabelCount(inst.task)) {
    throw DataError("instance '" + inst.id + "': label set must have " +
                    std::to_string(ExpectedLabelCount(inst.task)) + " labels");
  }
  std::set<std::string> uniq(inst.label_set.begin(), inst.label_set.end());
  if (uniq.size() != inst.label_set.size()) {
    throw DataError("instance '" + inst.id + "': duplicate labels");
  }
}

void ValidateGoldLabel(const Instance& inst) {
  if (!inst.gold_label) return;
  if (std::find(inst.label_set.begin(), inst.label_set.end(),
                *inst.gold_label) == inst.label_set.end()) {
    throw DataError("instance '" + inst.id + "': label '" + *inst.gold_label +
                    "' not in label set");
  }
}

std::string CleanText(std::string_view raw) {
  return std::string(TrimWhitespace(NormalizeNfc(raw)));
}

std::vector<std::string> KnownColumns(TaskKind kind, const LoaderConfig& c,
                                      std::vector<std::string>* required) {
  std::vector<std::string> known;
  switch (kind) {
    case TaskKind::kNli:
      *required = {c.premise_column, c.hypothesis_column, c.label_column};
      break;
    case TaskKind::kMultiChoiceQa:
      *required = {c.question_column, c.choices_column, c.answer_column};
      break;
    case TaskKind::kCommonsenseChoice:
      *required = {c.sent0_column, c.sent1_column, c.false_index_column};
      break;
  }
  known = *required;
  if (!c.explanation_column.empty()) known.push_back(c.explanation_column);
  if (!c.id_column.empty()) known.push_back(c.id_column);
  return known;
}

LoadResult LoadDelimited(const std::string& path, TaskKind kind,
                         SourceFormat format, const LoaderConfig& config,
                         const std::string& split) {
  std::string text = ReadFile(path);
  std::vector<CsvRow> rows =
      format == SourceFormat::kTsv ? ParseTsv(text) : ParseCsv(text);
  LoadResult result;
  result.dataset.kind = kind;
  result.dataset.split = split;
  if (kind == TaskKind::kNli) result.dataset.label_set = NliLabels();
  if (kind == TaskKind::kCommonsenseChoice) {
    result.dataset.label_set = ComveLabels();
  }
  if (rows.empty()) return result;

  std::vector<std::string> header;
  for (const auto& h : rows[0]) header.emplace_back(TrimWhitespace(h));
  std::vector<std::string> required;
  std::vector<std::string> known = KnownColumns(kind, config, &required);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    bool is_known = std::find(known.begin(), known.end(), h) != known.end();
    bool ignored = std::find(config.ignored_columns.begin(),
                             config.ignored_columns.end(),
                             h) != config.ignored_columns.end();
    if (!is_known && !ignored) {
      throw DataError(path + ": unknown column '" + h + "'");
    }
    if (is_known) {
      if (col.count(h)) throw DataError(path + ": duplicate column '" + h + "'");
      col[h] = i;
    }
  }
  for (const auto& r : required) {
    if (!col.count(r)) throw DataError(path + ": missing column '" + r + "'");
  }

  std::unordered_set<std::string> ids;
  result.source_rows = rows.size() - 1;
  for (size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != header.size()) {
      result.rejects.push_back({r, "expected " + std::to_string(header.size()) +
                                       " cells, got " +
                                       std::to_string(row.size())});
      continue;
    }
    auto cell = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end()) return {};
      return CleanText(row[it->second]);
    };
    std::string missing;
    for (const auto& name : required) {
      if (cell(name).empty()) {
        missing = name;
        break;
      }
    }
    if (!missing.empty()) {
      result.rejects.push_back({r, "missing " + missing});
      continue;
    }

    Instance inst;
    inst.task = kind;
    std::string id = cell(config.id_column);
    inst.id = id.empty() ? split + "-" + std::to_string(r) : id;
    std::string nle = cell(config.explanation_column);
    if (!nle.empty()) inst.gold_nle = nle;

    switch (kind) {
      case TaskKind::kNli: {
        inst.fields = {{"premise", cell(config.premise_column)},
                       {"hypothesis", cell(config.hypothesis_column)}};
        inst.label_set = NliLabels();
        inst.gold_label = CanonicalLabel(cell(config.label_column));
        break;
      }
      case TaskKind::kMultiChoiceQa: {
        std::string raw = cell(config.choices_column);
        std::vector<std::string> choices;
        size_t start = 0;
        while (true) {
          size_t sep = raw.find(config.choices_separator, start);
          choices.push_back(CleanText(std::string_view(raw).substr(
              start, sep == raw.npos ? raw.npos : sep - start)));
          if (sep == raw.npos) break;
          start = sep + config.choices_separator.size();
        }
        bool bad = choices.size() != 3 ||
                   std::any_of(choices.begin(), choices.end(),
                               [](const std::string& c) { return c.empty(); });
        if (bad) {
          result.rejects.push_back({r, "expected 3 non-empty choices"});
          continue;
        }
        inst.fields = {{"question", cell(config.question_column)},
                       {"choice1", choices[0]},
                       {"choice2", choices[1]},
                       {"choice3", choices[2]}};
        for (const auto& c : choices) inst.label_set.push_back(CanonicalLabel(c));
        std::set<std::string> uniq(inst.label_set.begin(), inst.label_set.end());
        if (uniq.size() != 3) {
          result.rejects.push_back({r, "duplicate choices"});
          continue;
        }
        inst.gold_label = CanonicalLabel(cell(config.answer_column));
        break;
      }
      case TaskKind::kCommonsenseChoice: {
        inst.fields = {{"sent1", cell(config.sent0_column)},
                       {"sent2", cell(config.sent1_column)}};
        inst.label_set = ComveLabels();
        std::string idx = cell(config.false_index_column);
        if (idx == "0") {
          inst.gold_label = ComveLabels()[0];
        } else if (idx == "1") {
          inst.gold_label = ComveLabels()[1];
        } else {
          std::string lab = CanonicalLabel(idx);
          inst.gold_label = lab;
        }
        break;
      }
    }
    try {
      ValidateGoldLabel(inst);
    } catch (const Error& e) {
      throw DataError(path + ": row " + std::to_string(r) + ": " + e.what());
    }
    if (!ids.insert(inst.id).second) {
      throw DataError(path + ": row " + std::to_string(r) +
                      ": duplicate id '" + inst.id + "'");
    }
    result.dataset.instances.push_back(std::move(inst));
  }
  return result;
}

// Parses without validating invariants.
Instance ParseInstance(const Json& j) {
  if (!j.is_object()) throw DataError("instance must be a JSON object");
  Instance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    inst.task = ParseTaskKind(j.at("task").get<std::string>());
    const Json& fields = j.at("fields");
    if (!fields.is_object()) throw DataError("fields must be an object");
    for (const auto& [k, v] : fields.items()) {
      const auto& names = FieldNames(inst.task);
      if (std::find(names.begin(), names.end(), k) == names.end()) {
        throw DataError("instance '" + inst.id + "': unknown field '" + k +
                        "'");
      }
    }
    for (const auto& name : FieldNames(inst.task)) {
      if (!fields.contains(name)) {
        throw DataError("instance '" + inst.id + "': missing field '" + name +
                        "'");
      }
      inst.fields.emplace_back(name,
                               CleanText(fields.at(name).get<std::string>()));
    }
    for (const auto& l : j.at("label_set")) {
      inst.label_set.push_back(CanonicalLabel(l.get<std::string>()));
    }
    if (j.contains("gold_label") && !j["gold_label"].is_null()) {
      inst.gold_label = CanonicalLabel(j["gold_label"].get<std::string>());
    }
    if (j.contains("gold_nle") && !j["gold_nle"].is_null()) {
      inst.gold_nle = j["gold_nle"].get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed instance object: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUsage) throw DataError(e.what());
    throw;
  }
  return inst;
}

LoadResult LoadJsonl(const std::string& path, TaskKind kind,
                     const std::string& split) {
  std::string text = ReadFile(path);
  LoadResult result;
  result.dataset.kind = kind;
  result.dataset.split = split;
  if (kind == TaskKind::kNli) result.dataset.label_set = NliLabels();
  if (kind == TaskKind::kCommonsenseChoice) {
    result.dataset.label_set = ComveLabels();
  }
  std::unordered_set<std::string> ids;
  size_t pos = 0;
  size_t r = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = std::string_view(text).substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (TrimWhitespace(line).empty()) continue;
    ++r;
    ++result.source_rows;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& e) {
      throw DataError(path + ": line " + std::to_string(r) +
                      ": invalid JSON: " + e.what());
    }
    Instance inst;
    try {
      inst = ParseInstance(j);
      ValidateShape(inst);
    } catch (const Error& e) {
      result.rejects.push_back({r, e.what()});
      continue;
    }
    try {
      ValidateGoldLabel(inst);
    } catch (const Error& e) {
      throw DataError(path + ": line " + std::to_string(r) + ": " + e.what());
    }
    if (inst.task != kind) {
      throw DataError(path + ": line " + std::to_string(r) + ": task '" +
                      std::string(TaskKindName(inst.task)) +
                      "' does not match dataset kind '" +
                      std::string(TaskKindName(kind)) + "'");
    }
    if (kind != TaskKind::kMultiChoiceQa &&
        inst.label_set != result.dataset.label_set) {
      throw DataError(path + ": line " + std::to_string(r) +
                      ": label set differs from the dataset label set");
    }
    if (!ids.insert(inst.id).second) {
      throw DataError(path + ": line " + std::to_string(r) +
                      ": duplicate id '" + inst.id + "'");
    }
    result.dataset.instances.push_back(std::move(inst));
  }
  return result;
}

}  // namespace

void ValidateInstance(const Instance& instance) {
  ValidateShape(instance);
  ValidateGoldLabel(instance);
}

SourceFormat ParseSourceFormat(std::string_view name) {
  std::string n = ToLower(name);
  if (n == "csv") return SourceFormat::kCsv;
  if (n == "tsv") return SourceFormat::kTsv;
  if (n == "jsonl" || n == "jsonl-normalized") return SourceFormat::kJsonl;
  throw UsageError("unknown source format '" + std::string(name) + "'");
}

LoaderConfig DefaultLoaderConfig(TaskKind kind) {
  LoaderConfig c;
  switch (kind) {
    case TaskKind::kNli:
      c.id_column = "pairID";
      c.premise_column = "Sentence1";
      c.hypothesis_column = "Sentence2";
      c.label_column = "gold_label";
      c.explanation_column = "Explanation_1";
      // Extra columns shipped in the e-SNLI release.
      c.ignored_columns = {"WorkerId",
                           "Sentence1_marked_1",
                           "Sentence2_marked_1",
                           "Sentence1_Highlighted_1",
                           "Sentence2_Highlighted_1",
                           "Explanation_2",
                           "Sentence1_marked_2",
                           "Sentence2_marked_2",
                           "Sentence1_Highlighted_2",
                           "Sentence2_Highlighted_2",
                           "Explanation_3",
                           "Sentence1_marked_3",
                           "Sentence2_marked_3",
                           "Sentence1_Highlighted_3",
                           "Sentence2_Highlighted_3"};
      break;
    case TaskKind::kMultiChoiceQa:
      c.id_column = "id";
      c.question_column = "question";
      c.choices_column = "choices";
      c.answer_column = "answer";
      c.explanation_column = "explanation";
      break;
    case TaskKind::kCommonsenseChoice:
      c.id_column = "id";
      c.sent0_column = "sent0";
      c.sent1_column = "sent1";
      c.false_index_column = "false_idx";
      c.explanation_column = "reason";
      break;
  }
  return c;
}

LoaderConfig LoaderConfigFromJson(TaskKind kind, const Json& overrides) {
  LoaderConfig c = DefaultLoaderConfig(kind);
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) throw UsageError("columns must be an object");
  std::map<std::string, std::string*> fields = {
      {"id_column", &c.id_column},
      {"premise_column", &c.premise_column},
      {"hypothesis_column", &c.hypothesis_column},
      {"question_column", &c.question_column},
      {"choices_column", &c.choices_column},
      {"choices_separator", &c.choices_separator},
      {"answer_column", &c.answer_column},
      {"sent0_column", &c.sent0_column},
      {"sent1_column", &c.sent1_column},
      {"false_index_column", &c.false_index_column},
      {"label_column", &c.label_column},
      {"explanation_column", &c.explanation_column},
  };
  for (const auto& [key, value] : overrides.items()) {
    if (key == "ignored_columns") {
      c.ignored_columns = value.get<std::vector<std::string>>();
      continue;
    }
    auto it = fields.find(key);
    if (it == fields.end()) throw UsageError("unknown loader key '" + key + "'");
    *it->second = value.get<std::string>();
  }
  return c;
}

LoadResult LoadDataset(const std::string& path, TaskKind kind,
                       SourceFormat format, const LoaderConfig& config,
                       const std::string& split) {
  if (format == SourceFormat::kJsonl) return LoadJsonl(path, kind, split);
  return LoadDelimited(path, kind, format, config, split);
}

LoadResult LoadDataset(const std::string& path, TaskKind kind,
                       SourceFormat format) {
  return LoadDataset(path, kind, format, DefaultLoaderConfig(kind));
}

Json InstanceToJson(const Instance& instance) {
  Json fields = Json::object();
  for (const auto& [k, v] : instance.fields) fields[k] = v;
  Json j;
  j["id"] = instance.id;
  j["task"] = TaskKindName(instance.task);
  j["fields"] = std::move(fields);
  j["label_set"] = instance.label_set;
  j["gold_label"] =
      instance.gold_label ? Json(*instance.gold_label) : Json(nullptr);
  j["gold_nle"] = instance.gold_nle ? Json(*instance.gold_nle) : Json(nullptr);
  return j;
}

Instance InstanceFromJson(const Json& j) {
  Instance inst = ParseInstance(j);
  ValidateInstance(inst);
  return inst;
}

std::string SerializeNormalized(const Dataset& ds) {
  std::string out;
  for (const Instance& inst : ds.instances) {
    out += InstanceToJson(inst).dump();
    out.push_back('\n');
  }
  return out;
}

void ExportNormalized(const Dataset& ds, const std::string& path) {
  for (const Instance& inst : ds.instances) ValidateInstance(inst);
  WriteFile(path, SerializeNormalized(ds));
}

}  // namespace nlefaith
