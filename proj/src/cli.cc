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

#include "nlefaith/cli.h"

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/lexicon.h"
#include "nlefaith/metrics_report.h"
#include "nlefaith/mock_model.h"
#include "nlefaith/parallel.h"
#include "nlefaith/reconstruction.h"
#include "nlefaith/text.h"
#include "nlefaith/transport.h"

#ifndef NLEFAITH_DEFAULT_DATA_DIR
#define NLEFAITH_DEFAULT_DATA_DIR "data"
#endif

namespace nlefaith {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;
constexpr const char* kToolVersion = "nlefaith 0.1.0";

std::string Resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string DefaultDatasetName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kNli:
      return "e-SNLI";
    case TaskKind::kMultiChoiceQa:
      return "CoS-E";
    case TaskKind::kCommonsenseChoice:
      return "ComVE";
  }
  return "dataset";
}

std::string SourceFormatName(SourceFormat f) {
  switch (f) {
    case SourceFormat::kCsv:
      return "csv";
    case SourceFormat::kTsv:
      return "tsv";
    case SourceFormat::kJsonl:
      return "jsonl";
  }
  return "csv";
}

std::string OptionalPath(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::string();
  return j[key].get<std::string>();
}

void CheckKeys(const Json& j, std::initializer_list<const char*> allowed,
               const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string_view TestKindName(TestKind kind) {
  switch (kind) {
    case TestKind::kCounterfactualRand:
      return "counterfactual-rand";
    case TestKind::kCounterfactualEdit:
      return "counterfactual-edit";
    case TestKind::kCounterfactualExternal:
      return "counterfactual-external";
    case TestKind::kReconstruction:
      return "reconstruction";
  }
  return "reconstruction";
}

TestKind ParseTestKind(std::string_view name) {
  for (TestKind k :
       {TestKind::kCounterfactualRand, TestKind::kCounterfactualEdit,
        TestKind::kCounterfactualExternal, TestKind::kReconstruction}) {
    if (TestKindName(k) == name) return k;
  }
  throw UsageError("unknown test '" + std::string(name) + "'");
}

std::string DataDir() {
  if (const char* env = std::getenv("NLEFAITH_DATA_DIR"); env && *env) {
    return env;
  }
  return NLEFAITH_DEFAULT_DATA_DIR;
}

namespace {

const Json& Need(const Json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) {
    throw UsageError(std::string(where) + " lacks required key '" + key + "'");
  }
  return j.at(key);
}

}  // namespace

RunConfig RunConfigFromJson(const Json& input, const std::string& base_dir) {
  if (!input.is_object()) throw UsageError("config must be a JSON object");
  const Json& j = input.contains("manifest_version") ? input.at("config") : input;
  RunConfig cfg;
  try {
    CheckKeys(j,
              {"dataset", "endpoint", "tests", "editor", "search",
               "external_interventions", "templates", "lexicon", "output_dir",
               "seed", "parallelism", "report_format"},
              "config");
    const Json& ds = Need(j, "dataset", "config");
    CheckKeys(ds, {"path", "kind", "format", "split", "name", "columns"},
              "dataset");
    cfg.dataset_path = Resolve(base_dir, Need(ds, "path", "dataset").get<std::string>());
    cfg.task = ParseTaskKind(Need(ds, "kind", "dataset").get<std::string>());
    cfg.format = ParseSourceFormat(ds.value("format", std::string("csv")));
    cfg.split = ds.value("split", cfg.split);
    cfg.dataset_name = ds.value("name", DefaultDatasetName(cfg.task));
    cfg.columns = ds.value("columns", Json::object());

    Json endpoint = Need(j, "endpoint", "config");
    cfg.endpoint = EndpointSpecFromJson(endpoint);
    cfg.endpoint.rules_path = Resolve(base_dir, cfg.endpoint.rules_path);

    if (j.contains("tests")) {
      for (const auto& t : j["tests"]) {
        cfg.tests.push_back(ParseTestKind(t.get<std::string>()));
      }
    } else {
      cfg.tests = {TestKind::kCounterfactualRand, TestKind::kCounterfactualEdit,
                   TestKind::kReconstruction};
    }
    if (j.contains("editor")) {
      const Json& ed = j["editor"];
      CheckKeys(ed, {"rand", "edit"}, "editor");
      if (ed.contains("rand")) {
        cfg.rand_editor = EditorConfigFromJson(ed["rand"], cfg.rand_editor);
      }
      if (ed.contains("edit")) {
        cfg.edit_editor = EditorConfigFromJson(ed["edit"], cfg.edit_editor);
      }
    }
    if (j.contains("search")) {
      const Json& s = j["search"];
      CheckKeys(s, {"vocabulary", "dataset_top_k"}, "search");
      cfg.vocabulary_path = Resolve(base_dir, OptionalPath(s, "vocabulary"));
      cfg.dataset_top_k = s.value("dataset_top_k", cfg.dataset_top_k);
    }
    cfg.external_interventions_path =
        Resolve(base_dir, OptionalPath(j, "external_interventions"));
    const std::string data = DataDir();
    cfg.templates_path = Resolve(base_dir, OptionalPath(j, "templates"));
    if (cfg.templates_path.empty()) {
      cfg.templates_path =
          Resolve(".", data + "/templates/esnli_templates.jsonl");
    }
    Json lex = j.value("lexicon", Json::object());
    CheckKeys(lex, {"adjectives", "adverbs", "pos"}, "lexicon");
    cfg.adjectives_path = Resolve(base_dir, OptionalPath(lex, "adjectives"));
    cfg.adverbs_path = Resolve(base_dir, OptionalPath(lex, "adverbs"));
    cfg.pos_path = Resolve(base_dir, OptionalPath(lex, "pos"));
    if (cfg.adjectives_path.empty()) {
      cfg.adjectives_path = Resolve(".", data + "/lexicon/adjectives.txt");
    }
    if (cfg.adverbs_path.empty()) {
      cfg.adverbs_path = Resolve(".", data + "/lexicon/adverbs.txt");
    }
    if (cfg.pos_path.empty()) {
      cfg.pos_path = Resolve(".", data + "/lexicon/pos.tsv");
    }
    cfg.output_dir =
        Resolve(base_dir, j.value("output_dir", std::string("nlefaith_out")));
    cfg.seed = j.value("seed", cfg.seed);
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
    cfg.report_format = j.value("report_format", cfg.report_format);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUsage) throw;
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

Json RunConfigToJson(const RunConfig& cfg) {
  Json j;
  Json ds;
  ds["path"] = cfg.dataset_path;
  ds["kind"] = TaskKindName(cfg.task);
  ds["format"] = SourceFormatName(cfg.format);
  ds["split"] = cfg.split;
  ds["name"] = cfg.dataset_name;
  ds["columns"] = cfg.columns;
  j["dataset"] = std::move(ds);
  j["endpoint"] = EndpointSpecToJson(cfg.endpoint);
  Json tests = Json::array();
  for (TestKind t : cfg.tests) tests.push_back(TestKindName(t));
  j["tests"] = std::move(tests);
  j["editor"]["rand"] = EditorConfigToJson(cfg.rand_editor);
  j["editor"]["edit"] = EditorConfigToJson(cfg.edit_editor);
  j["search"]["vocabulary"] =
      cfg.vocabulary_path.empty() ? Json(nullptr) : Json(cfg.vocabulary_path);
  j["search"]["dataset_top_k"] = cfg.dataset_top_k;
  j["external_interventions"] = cfg.external_interventions_path.empty()
                                    ? Json(nullptr)
                                    : Json(cfg.external_interventions_path);
  j["templates"] = cfg.templates_path;
  j["lexicon"]["adjectives"] = cfg.adjectives_path;
  j["lexicon"]["adverbs"] = cfg.adverbs_path;
  j["lexicon"]["pos"] = cfg.pos_path;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["parallelism"] = cfg.parallelism;
  j["report_format"] = cfg.report_format;
  return j;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  fs::path dir = fs::absolute(fs::path(path)).parent_path();
  return RunConfigFromJson(j, dir.string());
}

void ApplyEnvironment(RunConfig& cfg) {
  if (const char* env = std::getenv("NLEFAITH_ENDPOINT"); env && *env) {
    std::string value(env);
    EndpointSpec spec = cfg.endpoint;
    if (value.rfind("http://", 0) == 0) {
      spec.transport = TransportKind::kHttp;
      spec.url = value;
    } else if (value.rfind("mock:", 0) == 0) {
      spec.transport = TransportKind::kMock;
      spec.rules_path = Resolve(fs::current_path().string(), value.substr(5));
    } else {
      spec.transport = TransportKind::kSubprocess;
      spec.command = SplitWhitespace(value);
    }
    cfg.endpoint = spec;
  }
  if (const char* env = std::getenv("NLEFAITH_SEED"); env && *env) {
    try {
      size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError(std::string("NLEFAITH_SEED is not an integer: ") + env);
    }
  }
}

void ValidateRunConfig(const RunConfig& cfg) {
  if (cfg.parallelism < 1) throw UsageError("parallelism must be >= 1");
  if (cfg.tests.empty()) throw UsageError("no tests selected");
  ParseReportFormat(cfg.report_format);
  ValidateEditorConfig(cfg.rand_editor);
  ValidateEditorConfig(cfg.edit_editor);
  auto need = [](const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string(what) + " path is not set");
    if (!fs::is_regular_file(path)) {
      throw UsageError(std::string(what) + " not found: " + path);
    }
  };
  need(cfg.dataset_path, "dataset");
  need(cfg.adjectives_path, "adjective list");
  need(cfg.adverbs_path, "adverb list");
  need(cfg.pos_path, "POS table");
  bool external = false;
  for (TestKind t : cfg.tests) {
    if (t == TestKind::kReconstruction && cfg.task == TaskKind::kNli) {
      need(cfg.templates_path, "template file");
    }
    if (t == TestKind::kCounterfactualEdit && !cfg.vocabulary_path.empty()) {
      need(cfg.vocabulary_path, "vocabulary");
    }
    external = external || t == TestKind::kCounterfactualExternal;
  }
  if (external) need(cfg.external_interventions_path, "external interventions");
  if (cfg.endpoint.transport == TransportKind::kMock) {
    need(cfg.endpoint.rules_path, "mock rules");
  }
  if (cfg.output_dir.empty()) throw UsageError("output_dir is not set");
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw DataError("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

namespace {

std::string ModelLabel(const Capabilities& caps) {
  if (caps.setup != Setup::kOther) return std::string(SetupName(caps.setup));
  return caps.name.empty() ? "model" : caps.name;
}

std::string RecordFileName(TestKind t) {
  switch (t) {
    case TestKind::kCounterfactualRand:
      return "counterfactual_rand.jsonl";
    case TestKind::kCounterfactualEdit:
      return "counterfactual_edit.jsonl";
    case TestKind::kCounterfactualExternal:
      return "counterfactual_external.jsonl";
    case TestKind::kReconstruction:
      return "reconstruction.jsonl";
  }
  return "records.jsonl";
}

std::string ReportFileName(ReportFormat f, std::string_view stem = "report") {
  switch (f) {
    case ReportFormat::kMarkdown:
      return std::string(stem) + ".md";
    case ReportFormat::kCsv:
      return std::string(stem) + ".csv";
    case ReportFormat::kJson:
      return std::string(stem) + ".json";
  }
  return std::string(stem) + ".md";
}

CounterfactualRecord ErroredCounterfactual(const Instance& inst, Provenance p,
                                           const ModelOutput* original,
                                           const std::string& error) {
  CounterfactualRecord r;
  r.instance_id = inst.id;
  r.provenance = p;
  if (original) r.original = *original;
  r.errored = true;
  r.error = error;
  return r;
}

struct RunRecords {
  std::optional<std::vector<CounterfactualRecord>> rand;
  std::optional<std::vector<CounterfactualRecord>> edit;
  std::optional<std::vector<CounterfactualRecord>> external;
  std::optional<std::vector<ReconstructionRecord>> reconstruction;
};

Report MakeReport(const std::string& model, const std::string& dataset,
                  const RunRecords& rr) {
  Report report;
  if (rr.rand) {
    report.counterfactual.push_back(
        {{model, dataset, "Rand"}, CounterfactualRates(*rr.rand)});
  }
  if (rr.edit) {
    report.counterfactual.push_back(
        {{model, dataset, "Edit"}, CounterfactualRates(*rr.edit)});
  }
  if (rr.rand && rr.edit) {
    report.counterfactual.push_back(
        {{model, dataset, "Rand+Edit"}, UnionRates(*rr.rand, *rr.edit)});
  }
  if (rr.external) {
    report.counterfactual.push_back(
        {{model, dataset, "External"}, CounterfactualRates(*rr.external)});
  }
  if (rr.reconstruction) {
    report.reconstruction.push_back(
        {{model, dataset}, ReconstructionRates(*rr.reconstruction)});
  }
  return report;
}

Json RateCounts(const RateRow& row) {
  Json j;
  j["records"] = row.n_total;
  j["errored"] = row.n_errored;
  j["counter"] = row.n_counter;
  j["unfaithful"] = row.n_unfaithful;
  return j;
}

Json ReconCounts(const ReconRow& row) {
  Json j;
  j["records"] = row.n_total;
  j["errored"] = row.n_errored;
  j["reconstructed"] = row.n_reconstructed;
  j["unfaithful"] = row.n_unfaithful;
  return j;
}

}  // namespace

RunSummary ExecuteRun(const RunConfig& cfg, std::ostream& log) {
  ValidateRunConfig(cfg);
  const LoaderConfig loader = LoaderConfigFromJson(cfg.task, cfg.columns);
  LoadResult loaded =
      LoadDataset(cfg.dataset_path, cfg.task, cfg.format, loader, cfg.split);
  for (const RowReject& r : loaded.rejects) {
    log << "warning: " << cfg.dataset_path << ": row " << r.row
        << " rejected: " << r.reason << "\n";
  }
  const Dataset& ds = loaded.dataset;
  const Lexicon lex =
      Lexicon::Load(cfg.adjectives_path, cfg.adverbs_path, cfg.pos_path);

  std::vector<TestKind> tests;
  std::vector<std::string> skipped;
  for (TestKind t : cfg.tests) {
    if (std::find(tests.begin(), tests.end(), t) != tests.end()) continue;
    if (t == TestKind::kReconstruction && cfg.task == TaskKind::kMultiChoiceQa) {
      log << "warning: input reconstruction is not defined for qa; skipped\n";
      skipped.emplace_back(TestKindName(t));
      continue;
    }
    tests.push_back(t);
  }
  auto selected = [&](TestKind t) {
    return std::find(tests.begin(), tests.end(), t) != tests.end();
  };

  std::vector<NleTemplate> templates;
  if (selected(TestKind::kReconstruction) && cfg.task == TaskKind::kNli) {
    templates = LoadTemplates(cfg.templates_path);
  }
  std::vector<Phrase> vocab;
  if (selected(TestKind::kCounterfactualEdit)) {
    vocab = cfg.vocabulary_path.empty()
                ? BuildSearchVocabulary(lex, ds, cfg.dataset_top_k)
                : LoadVocabulary(cfg.vocabulary_path);
  }
  std::map<std::string, std::vector<Intervention>> external;
  if (selected(TestKind::kCounterfactualExternal)) {
    for (Intervention& iv : LoadInterventions(cfg.external_interventions_path)) {
      const Instance* inst = ds.Find(iv.instance_id);
      if (inst == nullptr) {
        throw DataError("external intervention names unknown instance '" +
                        iv.instance_id + "'");
      }
      ValidateIntervention(*inst, iv);
      external[iv.instance_id].push_back(std::move(iv));
    }
  }

  std::unique_ptr<Endpoint> base = OpenEndpoint(cfg.endpoint);
  const Capabilities caps = base->Handshake();
  if (!caps.deterministic) {
    throw ConformanceError("endpoint '" + caps.name +
                           "' declares deterministic=false; refusing to run");
  }
  CachingEndpoint endpoint(*base);

  const size_t n = ds.instances.size();
  std::vector<std::optional<ModelOutput>> originals(n);
  std::vector<std::string> original_errors(n);
  ParallelFor(n, cfg.parallelism, [&](size_t i) {
    try {
      originals[i] = endpoint.Infer(ds.instances[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTransport) throw;
      original_errors[i] = e.what();
    }
  });

  EditorConfig rand_cfg = cfg.rand_editor;
  rand_cfg.seed = cfg.seed;
  EditorConfig edit_cfg = cfg.edit_editor;
  edit_cfg.seed = cfg.seed;

  RunRecords rr;
  auto run_counterfactual = [&](Provenance p) {
    std::vector<CounterfactualRecord> records(n);
    ParallelFor(n, cfg.parallelism, [&](size_t i) {
      const Instance& inst = ds.instances[i];
      if (!originals[i]) {
        records[i] = ErroredCounterfactual(inst, p, nullptr, original_errors[i]);
        return;
      }
      const ModelOutput& orig = *originals[i];
      std::vector<Intervention> ivs;
      try {
        switch (p) {
          case Provenance::kRand:
            ivs = RandomInterventions(inst, lex, rand_cfg, orig.label);
            break;
          case Provenance::kEdit:
            ivs = SearchInterventions(inst, vocab, edit_cfg, endpoint, orig);
            break;
          case Provenance::kExternal: {
            auto it = external.find(inst.id);
            if (it != external.end()) ivs = it->second;
            break;
          }
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kTransport) throw;
        records[i] = ErroredCounterfactual(inst, p, &orig, e.what());
        return;
      }
      records[i] = RunCounterfactual(inst, orig, ivs, endpoint, p);
    });
    return records;
  };
  if (selected(TestKind::kCounterfactualRand)) {
    rr.rand = run_counterfactual(Provenance::kRand);
  }
  if (selected(TestKind::kCounterfactualEdit)) {
    rr.edit = run_counterfactual(Provenance::kEdit);
  }
  if (selected(TestKind::kCounterfactualExternal)) {
    rr.external = run_counterfactual(Provenance::kExternal);
  }
  if (selected(TestKind::kReconstruction)) {
    std::vector<ReconstructionRecord> records(n);
    ParallelFor(n, cfg.parallelism, [&](size_t i) {
      const Instance& inst = ds.instances[i];
      if (!originals[i]) {
        records[i].instance_id = inst.id;
        records[i].errored = true;
        records[i].error = original_errors[i];
        return;
      }
      records[i] =
          RunReconstruction(inst, *originals[i], endpoint, templates, lex);
    });
    rr.reconstruction = std::move(records);
  }

  fs::create_directories(cfg.output_dir);
  RunSummary summary;
  auto write = [&](const std::string& name, const std::string& content) {
    std::string path = (fs::path(cfg.output_dir) / name).string();
    WriteFile(path, content);
    summary.written.push_back(path);
  };
  Json counts = Json::object();
  if (rr.rand) {
    write(RecordFileName(TestKind::kCounterfactualRand), SerializeRecords(*rr.rand));
    counts["counterfactual-rand"] = RateCounts(CounterfactualRates(*rr.rand));
  }
  if (rr.edit) {
    write(RecordFileName(TestKind::kCounterfactualEdit), SerializeRecords(*rr.edit));
    counts["counterfactual-edit"] = RateCounts(CounterfactualRates(*rr.edit));
  }
  if (rr.external) {
    write(RecordFileName(TestKind::kCounterfactualExternal),
          SerializeRecords(*rr.external));
    counts["counterfactual-external"] =
        RateCounts(CounterfactualRates(*rr.external));
  }
  if (rr.reconstruction) {
    write(RecordFileName(TestKind::kReconstruction),
          SerializeRecords(*rr.reconstruction));
    counts["reconstruction"] =
        ReconCounts(ReconstructionRates(*rr.reconstruction));
  }
  const ReportFormat format = ParseReportFormat(cfg.report_format);
  write(ReportFileName(format),
        RenderReport(MakeReport(ModelLabel(caps), cfg.dataset_name, rr), format));

  size_t errored_originals = 0;
  for (const auto& e : original_errors) errored_originals += e.empty() ? 0 : 1;
  if (errored_originals > 0) {
    log << "warning: " << errored_originals
        << " instance(s) errored and are excluded from the rates\n";
  }

  Json config = RunConfigToJson(cfg);
  Json manifest;
  manifest["manifest_version"] = kManifestVersion;
  manifest["tool"] = kToolVersion;
  manifest["config"] = config;
  manifest["config_sha256"] = Sha256Hex(config.dump());
  manifest["seed"] = cfg.seed;
  manifest["parallelism"] = cfg.parallelism;
  manifest["capabilities"] = CapabilitiesToJson(caps);
  Json dataset;
  dataset["path"] = cfg.dataset_path;
  dataset["name"] = cfg.dataset_name;
  dataset["source_rows"] = loaded.source_rows;
  dataset["instances"] = n;
  dataset["rejected"] = Json::array();
  for (const RowReject& r : loaded.rejects) {
    dataset["rejected"].push_back({{"row", r.row}, {"reason", r.reason}});
  }
  manifest["dataset"] = std::move(dataset);
  manifest["errored_instances"] = errored_originals;
  manifest["counts"] = std::move(counts);
  manifest["skipped_tests"] = skipped;
  Json files = Json::array();
  for (const auto& p : summary.written) {
    files.push_back(fs::path(p).filename().string());
  }
  manifest["files"] = std::move(files);
  write("manifest.json", manifest.dump(2) + "\n");
  summary.manifest = std::move(manifest);
  return summary;
}

namespace {

Json ReadManifest(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "manifest.json").string();
  try {
    return Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

RunRecords ReadRunRecords(const std::string& run_dir) {
  RunRecords rr;
  auto path = [&](TestKind t) {
    return (fs::path(run_dir) / RecordFileName(t)).string();
  };
  if (fs::exists(path(TestKind::kCounterfactualRand))) {
    rr.rand = LoadCounterfactualRecords(path(TestKind::kCounterfactualRand));
  }
  if (fs::exists(path(TestKind::kCounterfactualEdit))) {
    rr.edit = LoadCounterfactualRecords(path(TestKind::kCounterfactualEdit));
  }
  if (fs::exists(path(TestKind::kCounterfactualExternal))) {
    rr.external =
        LoadCounterfactualRecords(path(TestKind::kCounterfactualExternal));
  }
  if (fs::exists(path(TestKind::kReconstruction))) {
    rr.reconstruction = LoadReconstructionRecords(path(TestKind::kReconstruction));
  }
  return rr;
}

std::pair<std::string, std::string> ReportLabels(const Json& manifest) {
  std::string model = "model";
  std::string dataset = "dataset";
  try {
    model = ModelLabel(CapabilitiesFromJson(manifest.at("capabilities")));
    dataset = manifest.at("dataset").at("name").get<std::string>();
  } catch (const std::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return {model, dataset};
}

// Splits audit entries by the provenance prefix of their record id.
std::map<std::string, std::vector<AuditEntry>> SplitAudit(
    const std::vector<AuditEntry>& audit) {
  std::map<std::string, std::vector<AuditEntry>> out;
  for (const AuditEntry& e : audit) {
    size_t colon = e.record_id.find(':');
    std::string prefix =
        colon == std::string::npos ? std::string() : e.record_id.substr(0, colon);
    if (prefix != "rand" && prefix != "edit" && prefix != "external") {
      throw DataError("audit record id '" + e.record_id +
                      "' lacks a rand:/edit:/external: prefix");
    }
    out[prefix].push_back(e);
  }
  return out;
}

void ApplyAuditToRun(RunRecords& rr, const std::vector<AuditEntry>& audit) {
  auto parts = SplitAudit(audit);
  auto apply = [&](std::optional<std::vector<CounterfactualRecord>>& recs,
                   const std::string& prefix) {
    auto it = parts.find(prefix);
    if (it == parts.end()) return;
    if (!recs) {
      throw DataError("audit references " + prefix +
                      " records but the run has none");
    }
    recs = ApplyAudit(std::move(*recs), it->second);
  };
  apply(rr.rand, "rand");
  apply(rr.edit, "edit");
  apply(rr.external, "external");
}

int Fail(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return ExitCodeFor(e.kind());
}

std::vector<Instance> ProbeInstances(TaskKind task) {
  Instance inst;
  inst.id = "probe-1";
  inst.task = task;
  switch (task) {
    case TaskKind::kNli:
      inst.fields = {{"premise", "Two women having drinks at the bar."},
                     {"hypothesis", "Three women are at a bar."}};
      inst.label_set = NliLabels();
      break;
    case TaskKind::kMultiChoiceQa:
      inst.fields = {{"question", "Where can books be read?"},
                     {"choice1", "shelf"},
                     {"choice2", "table"},
                     {"choice3", "backpack"}};
      inst.label_set = {"shelf", "table", "backpack"};
      break;
    case TaskKind::kCommonsenseChoice:
      inst.fields = {{"sent1", "Giraffes have long necks."},
                     {"sent2", "Monkeys have long necks."}};
      inst.label_set = ComveLabels();
      break;
  }
  return {inst};
}

int ValidateEndpoint(const EndpointSpec& spec,
                     const std::vector<Instance>& instances) {
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  };
  std::unique_ptr<Endpoint> ep;
  Capabilities caps;
  try {
    ep = OpenEndpoint(spec);
    caps = ep->Handshake();
    report(true, "handshake", CapabilitiesToJson(caps).dump());
  } catch (const Error& e) {
    report(false, "handshake", e.what());
    return 2;
  }
  report(caps.deterministic, "declares deterministic", "");
  for (const Instance& inst : instances) {
    const std::string tag = " [" + inst.id + "]";
    try {
      ModelOutput a = ep->Infer(inst);
      report(true, "infer label in label set" + tag, a.label);
      ModelOutput b = ep->Infer(inst);
      report(a == b, "infer is deterministic" + tag, "");
      Prediction p = ep->Predict(inst);
      report(p.label == a.label, "predict agrees with infer" + tag,
             p.label + " vs " + a.label);
    } catch (const Error& e) {
      report(false, "infer" + tag, e.what());
    }
  }
  return failures == 0 ? 0 : 2;
}

}  // namespace

int CliMain(int argc, char** argv) {
  CLI::App app{"Faithfulness tests for natural-language explanations", "nlefaith"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // run
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> parallelism;
  std::vector<std::string> tests;
  CLI::App* run = app.add_subcommand("run", "Run the configured tests");
  run->add_option("-c,--config", config_path, "Config or manifest file")
      ->required();
  run->add_option("-o,--out", out_dir, "Output directory (overrides config)");
  run->add_option("--seed", seed, "Seed (overrides config and NLEFAITH_SEED)");
  run->add_option("-j,--parallelism", parallelism,
                  "Instances processed concurrently");
  run->add_option("--tests", tests,
                  "counterfactual-rand, counterfactual-edit, "
                  "counterfactual-external, reconstruction")
      ->delimiter(',');

  // report
  std::string run_dir;
  std::string format = "markdown";
  std::string audit_path;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "Render rates of a finished run");
  report->add_option("-r,--run-dir", run_dir, "Run output directory")->required();
  report->add_option("-f,--format", format, "markdown, csv or json");
  report->add_option("--audit", audit_path, "Apply an audit CSV first");
  report->add_option("-o,--out", report_out, "Write to a file instead of stdout");

  // audit-export
  size_t audit_n = 100;
  std::string export_out;
  CLI::App* audit_export = app.add_subcommand(
      "audit-export", "Export the first unfaithful records for manual review");
  audit_export->add_option("-r,--run-dir", run_dir, "Run output directory")
      ->required();
  audit_export->add_option("-n,--count", audit_n, "Number of records");
  audit_export->add_option("-o,--out", export_out,
                           "Output CSV (default <run-dir>/audit.csv)");

  // audit-import
  CLI::App* audit_import = app.add_subcommand(
      "audit-import", "Apply a completed audit and write adjusted records");
  audit_import->add_option("-r,--run-dir", run_dir, "Run output directory")
      ->required();
  audit_import->add_option("-a,--audit", audit_path, "Audit CSV")->required();
  audit_import->add_option("-f,--format", format, "markdown, csv or json");

  // mock-serve
  std::string rules;
  std::string transport = "stdio";
  std::string host = "127.0.0.1";
  int port = 0;
  CLI::App* mock = app.add_subcommand("mock-serve", "Serve the rule-based mock model");
  mock->add_option("--rules", rules, "Mock rules JSONL")->required();
  mock->add_option("-t,--transport", transport, "stdio or http")
      ->check(CLI::IsMember({"stdio", "http"}));
  mock->add_option("--host", host, "http bind address");
  mock->add_option("--port", port, "http port (0 picks a free one)");

  // validate-endpoint
  std::string endpoint_json;
  std::string command;
  std::string url;
  std::string task = "nli";
  std::string dataset_path;
  std::string dataset_format = "csv";
  size_t probe_n = 5;
  CLI::App* validate = app.add_subcommand(
      "validate-endpoint", "Check an endpoint against the wire contract");
  validate->add_option("-c,--config", config_path, "Take endpoint and dataset from a config");
  validate->add_option("--endpoint", endpoint_json, "Endpoint spec as JSON");
  validate->add_option("--command", command, "Subprocess command line");
  validate->add_option("--url", url, "http base URL");
  validate->add_option("--rules", rules, "Mock rules JSONL");
  validate->add_option("--task", task, "nli, qa or comve");
  validate->add_option("--dataset", dataset_path, "Probe instances from this dataset");
  validate->add_option("--format", dataset_format, "csv, tsv or jsonl");
  validate->add_option("-n,--count", probe_n, "Number of dataset probes");

  // export-dataset
  std::string export_dataset_out;
  CLI::App* export_ds = app.add_subcommand(
      "export-dataset", "Write a dataset in the normalized JSONL format");
  export_ds->add_option("--dataset", dataset_path, "Source file")->required();
  export_ds->add_option("--task", task, "nli, qa or comve")->required();
  export_ds->add_option("--format", dataset_format, "csv, tsv or jsonl");
  export_ds->add_option("-o,--out", export_dataset_out, "Output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      RunConfig cfg = LoadRunConfig(config_path);
      ApplyEnvironment(cfg);
      if (!out_dir.empty()) cfg.output_dir = fs::absolute(out_dir).string();
      if (seed) cfg.seed = *seed;
      if (parallelism) cfg.parallelism = *parallelism;
      if (!tests.empty()) {
        cfg.tests.clear();
        for (const auto& t : tests) cfg.tests.push_back(ParseTestKind(t));
      }
      RunSummary s = ExecuteRun(cfg, std::cerr);
      for (const auto& p : s.written) std::cerr << "wrote " << p << "\n";
      return 0;
    }
    if (*report) {
      RunRecords rr = ReadRunRecords(run_dir);
      if (!audit_path.empty()) ApplyAuditToRun(rr, ParseAudit(ReadFile(audit_path)));
      auto [model, dataset] = ReportLabels(ReadManifest(run_dir));
      std::string text =
          RenderReport(MakeReport(model, dataset, rr), ParseReportFormat(format));
      if (report_out.empty()) {
        std::cout << text;
      } else {
        WriteFile(report_out, text);
      }
      return 0;
    }
    if (*audit_export) {
      RunRecords rr = ReadRunRecords(run_dir);
      std::vector<std::vector<CounterfactualRecord>> runs;
      if (rr.rand) runs.push_back(*rr.rand);
      if (rr.edit) runs.push_back(*rr.edit);
      if (rr.external) runs.push_back(*rr.external);
      AuditExport ex = ExportAudit(runs, audit_n);
      if (audit_n > ex.available) {
        std::cerr << "warning: requested " << audit_n << " records but only "
                  << ex.available << " unfaithful records exist\n";
      }
      const std::string path = export_out.empty()
                                   ? (fs::path(run_dir) / "audit.csv").string()
                                   : export_out;
      WriteFile(path, ex.csv);
      std::cerr << "wrote " << ex.rows << " rows to " << path << "\n";
      return 0;
    }
    if (*audit_import) {
      RunRecords rr = ReadRunRecords(run_dir);
      ApplyAuditToRun(rr, ParseAudit(ReadFile(audit_path)));
      auto dir = fs::path(run_dir);
      if (rr.rand) {
        WriteFile((dir / "counterfactual_rand.audited.jsonl").string(),
                  SerializeRecords(*rr.rand));
      }
      if (rr.edit) {
        WriteFile((dir / "counterfactual_edit.audited.jsonl").string(),
                  SerializeRecords(*rr.edit));
      }
      if (rr.external) {
        WriteFile((dir / "counterfactual_external.audited.jsonl").string(),
                  SerializeRecords(*rr.external));
      }
      auto [model, dataset] = ReportLabels(ReadManifest(run_dir));
      const ReportFormat f = ParseReportFormat(format);
      std::string text = RenderReport(MakeReport(model, dataset, rr), f);
      WriteFile((dir / ReportFileName(f, "report.audited")).string(), text);
      std::cout << text;
      return 0;
    }
    if (*mock) {
      const MockModel model = MockModel::FromFile(rules);
      auto handler = [&model](std::string_view line) {
        return model.HandleLine(line);
      };
      if (transport == "stdio") {
        std::ios::sync_with_stdio(false);
        ServeStdio(handler, std::cin, std::cout);
      } else {
        ServeHttp(handler, host, port, [&](int bound) {
          std::cerr << "listening on http://" << host << ":" << bound
                    << std::endl;
        });
      }
      return 0;
    }
    if (*validate) {
      EndpointSpec spec;
      std::vector<Instance> probes;
      TaskKind kind = ParseTaskKind(task);
      if (!config_path.empty()) {
        RunConfig cfg = LoadRunConfig(config_path);
        ApplyEnvironment(cfg);
        spec = cfg.endpoint;
        kind = cfg.task;
        LoadResult lr = LoadDataset(cfg.dataset_path, cfg.task, cfg.format,
                                    LoaderConfigFromJson(cfg.task, cfg.columns),
                                    cfg.split);
        for (size_t i = 0; i < lr.dataset.instances.size() && i < probe_n; ++i) {
          probes.push_back(lr.dataset.instances[i]);
        }
      } else {
        int given = !endpoint_json.empty() + !command.empty() + !url.empty() +
                    !rules.empty();
        if (given != 1) {
          throw UsageError(
              "give exactly one of --config, --endpoint, --command, --url, "
              "--rules");
        }
        if (!endpoint_json.empty()) {
          try {
            spec = EndpointSpecFromJson(Json::parse(endpoint_json));
          } catch (const Json::exception& e) {
            throw UsageError(std::string("--endpoint: ") + e.what());
          }
        } else if (!command.empty()) {
          spec.transport = TransportKind::kSubprocess;
          spec.command = SplitWhitespace(command);
        } else if (!url.empty()) {
          spec.transport = TransportKind::kHttp;
          spec.url = url;
        } else {
          spec.transport = TransportKind::kMock;
          spec.rules_path = rules;
        }
        if (!dataset_path.empty()) {
          LoadResult lr = LoadDataset(dataset_path, kind,
                                      ParseSourceFormat(dataset_format));
          for (size_t i = 0; i < lr.dataset.instances.size() && i < probe_n;
               ++i) {
            probes.push_back(lr.dataset.instances[i]);
          }
        }
      }
      if (probes.empty()) probes = ProbeInstances(kind);
      return ValidateEndpoint(spec, probes);
    }
    if (*export_ds) {
      LoadResult lr = LoadDataset(dataset_path, ParseTaskKind(task),
                                  ParseSourceFormat(dataset_format));
      for (const RowReject& r : lr.rejects) {
        std::cerr << "warning: row " << r.row << " rejected: " << r.reason << "\n";
      }
      ExportNormalized(lr.dataset, export_dataset_out);
      return 0;
    }
  } catch (const Error& e) {
    return Fail(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace nlefaith
