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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/metrics_report.h"
#include "test_util.h"

namespace nlefaith {
namespace {

namespace fs = std::filesystem;
using ::nlefaith::testing::BinaryPath;
using ::nlefaith::testing::ScratchDir;
using ::nlefaith::testing::TestData;

Json GoldenConfig(const std::string& out) {
  return Json::parse(R"({
    "dataset": {"path": ")" + TestData("esnli_golden.csv") + R"(", "kind": "nli"},
    "endpoint": {"transport": "mock", "rules": ")" + TestData("golden_rules.jsonl") + R"("},
    "output_dir": ")" + out + R"(",
    "seed": 3
  })");
}

int RunBinary(const std::string& args, std::string* output = nullptr) {
  const std::string log = ScratchDir("cli_bin_log") + "/out.txt";
  int status = std::system((BinaryPath() + " " + args + " >" + log + " 2>&1").c_str());
  if (output) *output = ReadFile(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(RunConfigTest, DefaultsAndRelativePaths) {
  Json j = Json::parse(R"({"dataset": {"path": "d.csv", "kind": "nli"},
                           "endpoint": {"transport": "mock", "rules": "r.jsonl"}})");
  RunConfig cfg = RunConfigFromJson(j, "/base");
  EXPECT_EQ(cfg.dataset_path, "/base/d.csv");
  EXPECT_EQ(cfg.endpoint.rules_path, "/base/r.jsonl");
  EXPECT_EQ(cfg.task, TaskKind::kNli);
  EXPECT_EQ(cfg.tests.size(), 3u);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.parallelism, 1);
  EXPECT_EQ(cfg.templates_path, DataDir() + "/templates/esnli_templates.jsonl");
  EXPECT_EQ(cfg.pos_path, DataDir() + "/lexicon/pos.tsv");
  EXPECT_EQ(cfg.output_dir, "/base/nlefaith_out");

  RunConfig again = RunConfigFromJson(RunConfigToJson(cfg), "/elsewhere");
  EXPECT_EQ(RunConfigToJson(again), RunConfigToJson(cfg));
}

TEST(RunConfigTest, EditorAndTestSelection) {
  Json j = Json::parse(R"({"dataset": {"path": "/d.csv", "kind": "comve"},
    "endpoint": {"transport": "mock", "rules": "/r.jsonl"},
    "tests": ["reconstruction"],
    "editor": {"edit": {"n_positions": 5, "n_candidates": 7}},
    "report_format": "json", "parallelism": 4})");
  RunConfig cfg = RunConfigFromJson(j, "/");
  EXPECT_EQ(cfg.task, TaskKind::kCommonsenseChoice);
  EXPECT_EQ(cfg.tests, std::vector<TestKind>{TestKind::kReconstruction});
  EXPECT_EQ(cfg.edit_editor.n_positions, 5u);
  EXPECT_EQ(cfg.edit_editor.n_candidates, 7u);
  EXPECT_EQ(cfg.rand_editor.n_positions, DefaultRandomConfig().n_positions);
  EXPECT_EQ(cfg.report_format, "json");
  EXPECT_EQ(cfg.parallelism, 4);
}

TEST(RunConfigTest, UsageErrors) {
  auto kind = [](const std::string& text) {
    try {
      RunConfigFromJson(Json::parse(text), "/");
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kData;
  };
  EXPECT_EQ(kind(R"({"dataset": {"path": "/d", "kind": "nli"}, "endpoint": {}, "colour": 1})"),
            ErrorKind::kUsage);
  EXPECT_EQ(kind(R"({"endpoint": {"transport": "mock", "rules": "/r"}})"),
            ErrorKind::kUsage);
  EXPECT_EQ(kind(R"({"dataset": {"path": "/d"}, "endpoint": {"transport": "mock",
      "rules": "/r"}})"),
            ErrorKind::kUsage);
  EXPECT_EQ(kind(R"({"dataset": {"path": "/d"}, "endpoint": {"transport": "mock",
      "rules": "/r"}, "tests": ["telepathy"]})"),
            ErrorKind::kUsage);
  EXPECT_EQ(kind(R"({"dataset": {"path": "/d", "kind": "poetry"},
      "endpoint": {"transport": "mock", "rules": "/r"}})"),
            ErrorKind::kUsage);
}

TEST(RunConfigTest, LoadResolvesAgainstConfigDirectory) {
  const std::string dir = ScratchDir("cli_load");
  WriteFile(dir + "/c.json", R"({"dataset": {"path": "data/x.csv", "kind": "nli"},
    "endpoint": {"transport": "mock", "rules": "r.jsonl"}, "output_dir": "o"})");
  RunConfig cfg = LoadRunConfig(dir + "/c.json");
  EXPECT_EQ(cfg.dataset_path, dir + "/data/x.csv");
  EXPECT_EQ(cfg.output_dir, dir + "/o");
  EXPECT_THROW(ValidateRunConfig(cfg), Error);
  EXPECT_THROW(LoadRunConfig(dir + "/missing.json"), Error);
}

TEST(RunConfigTest, EnvironmentOverrides) {
  RunConfig cfg = RunConfigFromJson(GoldenConfig("/tmp/x"), "/");
  setenv("NLEFAITH_SEED", "99", 1);
  setenv("NLEFAITH_ENDPOINT", "http://127.0.0.1:9", 1);
  ApplyEnvironment(cfg);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.endpoint.transport, TransportKind::kHttp);
  EXPECT_EQ(cfg.endpoint.url, "http://127.0.0.1:9");
  setenv("NLEFAITH_ENDPOINT", "python3 -m bridge --model t5", 1);
  ApplyEnvironment(cfg);
  EXPECT_EQ(cfg.endpoint.transport, TransportKind::kSubprocess);
  EXPECT_EQ(cfg.endpoint.command,
            (std::vector<std::string>{"python3", "-m", "bridge", "--model", "t5"}));
  setenv("NLEFAITH_ENDPOINT", "mock:/tmp/rules.jsonl", 1);
  ApplyEnvironment(cfg);
  EXPECT_EQ(cfg.endpoint.transport, TransportKind::kMock);
  EXPECT_EQ(cfg.endpoint.rules_path, "/tmp/rules.jsonl");
  setenv("NLEFAITH_SEED", "seven", 1);
  EXPECT_THROW(ApplyEnvironment(cfg), Error);
  unsetenv("NLEFAITH_SEED");
  unsetenv("NLEFAITH_ENDPOINT");
}

TEST(Sha256Test, KnownVector) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ExecuteRunTest, WritesRecordsReportAndManifest) {
  const std::string out = ScratchDir("cli_exec");
  RunConfig cfg = RunConfigFromJson(GoldenConfig(out), "/");
  std::ostringstream log;
  RunSummary s = ExecuteRun(cfg, log);
  for (const char* f : {"counterfactual_rand.jsonl", "counterfactual_edit.jsonl",
                        "reconstruction.jsonl", "report.md", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out + "/" + f)) << f;
  }
  const Json& m = s.manifest;
  EXPECT_EQ(m["manifest_version"], 1);
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["dataset"]["instances"], 2);
  EXPECT_EQ(m["config_sha256"], Sha256Hex(m["config"].dump()));
  EXPECT_EQ(Json::parse(ReadFile(out + "/manifest.json")), m);

  auto recon = LoadReconstructionRecords(out + "/reconstruction.jsonl");
  ASSERT_EQ(recon.size(), 2u);
  EXPECT_EQ(recon[1].instance_id, "g-row2");
  EXPECT_EQ(recon[1].unfaithful, true);
  EXPECT_EQ(m["counts"]["reconstruction"]["unfaithful"],
            ReconstructionRates(recon).n_unfaithful);
  std::string report = ReadFile(out + "/report.md");
  EXPECT_NE(report.find("| Rand+Edit |"), std::string::npos);
}

TEST(ExecuteRunTest, RerunAndManifestReplayAreByteIdentical) {
  const std::string a = ScratchDir("cli_rerun_a");
  const std::string b = ScratchDir("cli_rerun_b");
  const std::string c = ScratchDir("cli_rerun_c");
  std::ostringstream log;
  ExecuteRun(RunConfigFromJson(GoldenConfig(a), "/"), log);
  ExecuteRun(RunConfigFromJson(GoldenConfig(b), "/"), log);
  RunConfig replay = LoadRunConfig(a + "/manifest.json");
  replay.output_dir = c;
  ExecuteRun(replay, log);
  for (const char* f : {"counterfactual_rand.jsonl", "counterfactual_edit.jsonl",
                        "reconstruction.jsonl", "report.md"}) {
    EXPECT_EQ(ReadFile(a + "/" + f), ReadFile(b + "/" + f)) << f;
    EXPECT_EQ(ReadFile(a + "/" + f), ReadFile(c + "/" + f)) << f;
  }
}

TEST(ExecuteRunTest, NonDeterministicEndpointIsRefused) {
  const std::string dir = ScratchDir("cli_nondet");
  WriteFile(dir + "/rules.jsonl",
            "{\"mock\": {\"deterministic\": false}}\n"
            "{\"trigger\": {\"type\": \"always\"}, \"label\": \"neutral\", "
            "\"nle\": \"x\"}\n");
  Json j = GoldenConfig(dir + "/out");
  j["endpoint"]["rules"] = dir + "/rules.jsonl";
  std::ostringstream log;
  try {
    ExecuteRun(RunConfigFromJson(j, "/"), log);
    FAIL() << "expected a conformance error";
  } catch (const Error& e) {
    EXPECT_EQ(ExitCodeFor(e.kind()), 2);
  }
  WriteFile(dir + "/c.json", j.dump());
  EXPECT_EQ(RunBinary("run -c " + dir + "/c.json"), 2);
}

TEST(BinaryTest, ExitCodes) {
  const std::string dir = ScratchDir("cli_exit");
  EXPECT_EQ(RunBinary("--help"), 0);
  EXPECT_EQ(RunBinary("run"), 1);
  EXPECT_EQ(RunBinary("frobnicate"), 1);
  WriteFile(dir + "/bad_key.json", R"({"dataset": {"path": "x"}, "bogus": 1})");
  EXPECT_EQ(RunBinary("run -c " + dir + "/bad_key.json"), 1);
  WriteFile(dir + "/bad.csv", "premise,hypothesis\n\"unterminated\n");
  Json j = GoldenConfig(dir + "/out");
  j["dataset"]["path"] = dir + "/bad.csv";
  WriteFile(dir + "/bad_data.json", j.dump());
  EXPECT_EQ(RunBinary("run -c " + dir + "/bad_data.json"), 3);
  EXPECT_EQ(RunBinary("report -r " + dir + "/nowhere"), 3);
}

TEST(BinaryTest, RunReportAndAuditRoundTrip) {
  const std::string dir = ScratchDir("cli_audit");
  WriteFile(dir + "/c.json", GoldenConfig(dir + "/out").dump());
  std::string text;
  ASSERT_EQ(RunBinary("run -c " + dir + "/c.json --tests counterfactual-rand", &text), 0)
      << text;
  EXPECT_FALSE(fs::exists(dir + "/out/counterfactual_edit.jsonl"));
  ASSERT_EQ(RunBinary("report -r " + dir + "/out -f csv", &text), 0) << text;
  EXPECT_NE(text.find("counterfactual"), std::string::npos);

  auto rand = LoadCounterfactualRecords(dir + "/out/counterfactual_rand.jsonl");
  size_t unfaithful = CounterfactualRates(rand).n_unfaithful;
  ASSERT_EQ(RunBinary("audit-export -r " + dir + "/out -n 5", &text), 0) << text;
  std::vector<CsvRow> rows = ParseCsv(ReadFile(dir + "/out/audit.csv"));
  EXPECT_EQ(rows.size(), 1 + std::min<size_t>(5, unfaithful));
  ASSERT_EQ(RunBinary("audit-import -r " + dir + "/out -a " + dir + "/out/audit.csv",
                      &text),
            0)
      << text;
  EXPECT_EQ(LoadCounterfactualRecords(dir + "/out/counterfactual_rand.audited.jsonl"),
            rand);
}

TEST(BinaryTest, AuditExportWithNothingUnfaithfulIsHeaderOnly) {
  const std::string dir = ScratchDir("cli_audit_empty");
  std::vector<CounterfactualRecord> recs(2);
  recs[0].instance_id = "a";
  recs[1].instance_id = "b";
  for (auto& r : recs) r.original = {"neutral", "x", std::nullopt};
  WriteFile(dir + "/counterfactual_rand.jsonl", SerializeRecords(recs));
  WriteFile(dir + "/manifest.json", R"({"manifest_version": 1, "config": {}})");
  std::string text;
  ASSERT_EQ(RunBinary("audit-export -r " + dir + " -n 10", &text), 0) << text;
  EXPECT_EQ(ParseCsv(ReadFile(dir + "/audit.csv")).size(), 1u);
  EXPECT_NE(text.find("warning"), std::string::npos);
}

TEST(BinaryTest, ValidateEndpointAgainstMock) {
  std::string text;
  EXPECT_EQ(RunBinary("validate-endpoint --rules " + TestData("golden_rules.jsonl") +
                          " --task nli",
                      &text),
            0)
      << text;
  EXPECT_NE(text.find("PASS"), std::string::npos);
  EXPECT_EQ(text.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace nlefaith
