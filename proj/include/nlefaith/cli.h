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

// End-to-end orchestration behind the `nlefaith` command.
//
// Run config (JSON; relative paths are resolved against the file's
// directory):
//
//   {
//     "dataset": {"path": "esnli_test.csv", "kind": "nli", "format": "csv",
//                 "split": "test", "name": "e-SNLI", "columns": {...}},
//     "endpoint": {"transport": "mock", "rules": "rules.jsonl"},
//     "tests": ["counterfactual-rand", "counterfactual-edit",
//               "reconstruction"],
//     "editor": {"rand": {...}, "edit": {...}},
//     "search": {"vocabulary": null, "dataset_top_k": 100},
//     "external_interventions": null,
//     "templates": null,
//     "lexicon": {"adjectives": null, "adverbs": null, "pos": null},
//     "output_dir": "out",
//     "seed": 0,
//     "parallelism": 1,
//     "report_format": "markdown"
//   }
//
// Null resource paths fall back to the shipped data directory. A manifest
// written by `run` is accepted wherever a config is.
//
// Environment: NLEFAITH_ENDPOINT replaces the endpoint ("http://..." for
// http, "mock:<rules>" for the mock, anything else is a subprocess command
// line split on whitespace); NLEFAITH_SEED replaces the seed;
// NLEFAITH_DATA_DIR replaces the shipped data directory.

#ifndef NLEFAITH_CLI_H_
#define NLEFAITH_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/counterfactual.h"
#include "nlefaith/model_protocol.h"

namespace nlefaith {

enum class TestKind {
  kCounterfactualRand,
  kCounterfactualEdit,
  kCounterfactualExternal,
  kReconstruction
};
std::string_view TestKindName(TestKind kind);
TestKind ParseTestKind(std::string_view name);

struct RunConfig {
  std::string dataset_path;
  TaskKind task = TaskKind::kNli;
  SourceFormat format = SourceFormat::kCsv;
  std::string split = "test";
  std::string dataset_name;
  Json columns = Json::object();
  EndpointSpec endpoint;
  std::vector<TestKind> tests;
  EditorConfig rand_editor = DefaultRandomConfig();
  EditorConfig edit_editor = DefaultSearchConfig();
  std::string vocabulary_path;  // empty: lexicon lists + dataset words
  size_t dataset_top_k = 100;
  std::string external_interventions_path;
  std::string templates_path;
  std::string adjectives_path;
  std::string adverbs_path;
  std::string pos_path;
  std::string output_dir;
  uint64_t seed = 0;
  int parallelism = 1;
  std::string report_format = "markdown";
};

// Directory holding the shipped lexicon and templates.
std::string DataDir();

// Parses a config (or a manifest's embedded config). Relative paths are
// resolved against `base_dir`. Throws UsageError.
RunConfig RunConfigFromJson(const Json& j, const std::string& base_dir);
Json RunConfigToJson(const RunConfig& cfg);
RunConfig LoadRunConfig(const std::string& path);

// Applies NLEFAITH_ENDPOINT / NLEFAITH_SEED.
void ApplyEnvironment(RunConfig& cfg);

// Checks ranges and that every referenced input file exists.
void ValidateRunConfig(const RunConfig& cfg);

std::string Sha256Hex(std::string_view data);

struct RunSummary {
  Json manifest;
  std::vector<std::string> written;  // output file paths
};

// Executes the configured tests and writes records, report and manifest.
// Throws Error on fatal problems.
RunSummary ExecuteRun(const RunConfig& cfg, std::ostream& log);

// Entry point of the `nlefaith` binary; returns the exit status.
int CliMain(int argc, char** argv);

}  // namespace nlefaith

#endif  // NLEFAITH_CLI_H_
