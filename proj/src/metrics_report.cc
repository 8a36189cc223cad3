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

#include "nlefaith/metrics_report.h"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/text.h"

namespace nlefaith {

std::optional<double> Percent(uint64_t num, uint64_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::optional<int64_t> PercentHundredths(uint64_t num, uint64_t den) {
  if (den == 0) return std::nullopt;
  const unsigned __int128 n = num;
  const unsigned __int128 d = den;
  return static_cast<int64_t>((20000 * n + d) / (2 * d));
}

std::string FormatPercent(uint64_t num, uint64_t den) {
  auto h = PercentHundredths(num, den);
  if (!h) return std::string();
  std::string frac = std::to_string(*h % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(*h / 100) + "." + frac;
}

void ValidateRateRow(const RateRow& row) {
  if (row.n_errored > row.n_total || row.n_counter > row.n_valid() ||
      row.n_unfaithful > row.n_counter) {
    throw DataError("rate counts violate unfaithful <= counter <= total - errored");
  }
}

void ValidateReconRow(const ReconRow& row) {
  if (row.n_errored > row.n_total || row.n_reconstructed > row.n_valid() ||
      row.n_unfaithful > row.n_reconstructed) {
    throw DataError(
        "reconstruction counts violate unfaithful <= reconstructed <= total - "
        "errored");
  }
}

RateRow CounterfactualRates(const std::vector<CounterfactualRecord>& records) {
  RateRow row;
  row.n_total = records.size();
  for (const auto& r : records) {
    if (r.errored) {
      ++row.n_errored;
      continue;
    }
    if (r.flipped) ++row.n_counter;
    if (r.unfaithful) ++row.n_unfaithful;
  }
  ValidateRateRow(row);
  return row;
}

namespace {

std::unordered_map<std::string, const CounterfactualRecord*> IndexById(
    const std::vector<CounterfactualRecord>& records, std::string_view what) {
  std::unordered_map<std::string, const CounterfactualRecord*> index;
  for (const auto& r : records) {
    if (!index.emplace(r.instance_id, &r).second) {
      throw DataError(std::string(what) + " records repeat instance '" +
                      r.instance_id + "'");
    }
  }
  return index;
}

}  // namespace

RateRow UnionRates(const std::vector<CounterfactualRecord>& rand_records,
                   const std::vector<CounterfactualRecord>& edit_records) {
  auto edit = IndexById(edit_records, "edit");
  IndexById(rand_records, "rand");
  if (edit.size() != rand_records.size()) {
    throw DataError("rand and edit runs cover different instances");
  }
  RateRow row;
  row.n_total = rand_records.size();
  for (const auto& a : rand_records) {
    auto it = edit.find(a.instance_id);
    if (it == edit.end()) {
      throw DataError("instance '" + a.instance_id + "' is missing from the edit run");
    }
    const CounterfactualRecord& b = *it->second;
    if (a.errored && b.errored) {
      ++row.n_errored;
      continue;
    }
    const bool counter = (!a.errored && a.flipped) || (!b.errored && b.flipped);
    const bool unfaithful =
        (!a.errored && a.unfaithful) || (!b.errored && b.unfaithful);
    if (counter) ++row.n_counter;
    if (unfaithful) ++row.n_unfaithful;
  }
  ValidateRateRow(row);
  return row;
}

ReconRow ReconstructionRates(const std::vector<ReconstructionRecord>& records) {
  ReconRow row;
  row.n_total = records.size();
  for (const auto& r : records) {
    if (r.errored) {
      ++row.n_errored;
      continue;
    }
    if (r.reconstructable) ++row.n_reconstructed;
    if (r.unfaithful.value_or(false)) ++row.n_unfaithful;
  }
  ValidateReconRow(row);
  return row;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw UsageError("unknown report format '" + std::string(name) + "'");
}

namespace {

std::string CellOrNa(uint64_t num, uint64_t den) {
  std::string s = FormatPercent(num, den);
  return s.empty() ? "n/a" : s;
}

Json PercentJson(uint64_t num, uint64_t den) {
  auto h = PercentHundredths(num, den);
  if (!h) return nullptr;
  return static_cast<double>(*h) / 100.0;
}

std::string RenderMarkdown(const Report& report) {
  std::string out;
  if (!report.counterfactual.empty()) {
    out +=
        "### Counterfactual test\n\n"
        "| Model | Dataset | Editor | N | Errored | % Counter | "
        "% Counter Unfaith | % Total Unfaith |\n"
        "|---|---|---|---:|---:|---:|---:|---:|\n";
    for (const auto& [label, row] : report.counterfactual) {
      out += "| " + label.model + " | " + label.dataset + " | " + label.editor +
             " | " + std::to_string(row.n_total) + " | " +
             std::to_string(row.n_errored) + " | " +
             CellOrNa(row.n_counter, row.n_valid()) + " | " +
             CellOrNa(row.n_unfaithful, row.n_counter) + " | " +
             CellOrNa(row.n_unfaithful, row.n_valid()) + " |\n";
    }
  }
  if (!report.reconstruction.empty()) {
    if (!out.empty()) out += "\n";
    out +=
        "### Input reconstruction test\n\n"
        "| Model | Dataset | N | Errored | % Reconst | % Total Unfaith |\n"
        "|---|---|---:|---:|---:|---:|\n";
    for (const auto& [label, row] : report.reconstruction) {
      out += "| " + label.model + " | " + label.dataset + " | " +
             std::to_string(row.n_total) + " | " +
             std::to_string(row.n_errored) + " | " +
             CellOrNa(row.n_reconstructed, row.n_valid()) + " | " +
             CellOrNa(row.n_unfaithful, row.n_valid()) + " |\n";
    }
  }
  return out;
}

std::string RenderCsv(const Report& report) {
  std::string out = CsvLine(
      {"table", "model", "dataset", "editor", "n_total", "n_errored", "n_hits",
       "n_unfaithful", "pct_counter", "pct_counter_unfaith", "pct_reconst",
       "pct_total_unfaith"});
  for (const auto& [label, row] : report.counterfactual) {
    out += CsvLine({"counterfactual", label.model, label.dataset, label.editor,
                    std::to_string(row.n_total), std::to_string(row.n_errored),
                    std::to_string(row.n_counter),
                    std::to_string(row.n_unfaithful),
                    FormatPercent(row.n_counter, row.n_valid()),
                    FormatPercent(row.n_unfaithful, row.n_counter), "",
                    FormatPercent(row.n_unfaithful, row.n_valid())});
  }
  for (const auto& [label, row] : report.reconstruction) {
    out += CsvLine({"reconstruction", label.model, label.dataset, "",
                    std::to_string(row.n_total), std::to_string(row.n_errored),
                    std::to_string(row.n_reconstructed),
                    std::to_string(row.n_unfaithful), "", "",
                    FormatPercent(row.n_reconstructed, row.n_valid()),
                    FormatPercent(row.n_unfaithful, row.n_valid())});
  }
  return out;
}

std::string RenderJson(const Report& report) {
  Json j;
  j["counterfactual"] = Json::array();
  for (const auto& [label, row] : report.counterfactual) {
    Json r;
    r["model"] = label.model;
    r["dataset"] = label.dataset;
    r["editor"] = label.editor;
    r["n_total"] = row.n_total;
    r["n_errored"] = row.n_errored;
    r["n_counter"] = row.n_counter;
    r["n_unfaithful"] = row.n_unfaithful;
    r["pct_counter"] = PercentJson(row.n_counter, row.n_valid());
    r["pct_counter_unfaith"] = PercentJson(row.n_unfaithful, row.n_counter);
    r["pct_total_unfaith"] = PercentJson(row.n_unfaithful, row.n_valid());
    j["counterfactual"].push_back(std::move(r));
  }
  j["reconstruction"] = Json::array();
  for (const auto& [label, row] : report.reconstruction) {
    Json r;
    r["model"] = label.model;
    r["dataset"] = label.dataset;
    r["n_total"] = row.n_total;
    r["n_errored"] = row.n_errored;
    r["n_reconstructed"] = row.n_reconstructed;
    r["n_unfaithful"] = row.n_unfaithful;
    r["pct_reconst"] = PercentJson(row.n_reconstructed, row.n_valid());
    r["pct_total_unfaith"] = PercentJson(row.n_unfaithful, row.n_valid());
    j["reconstruction"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

}  // namespace

std::string RenderReport(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown:
      return RenderMarkdown(report);
    case ReportFormat::kCsv:
      return RenderCsv(report);
    case ReportFormat::kJson:
      return RenderJson(report);
  }
  return std::string();
}

std::string AuditRecordId(const CounterfactualRecord& r) {
  return std::string(ProvenanceName(r.provenance)) + ":" + r.instance_id;
}

std::vector<AuditEntry> ParseAudit(std::string_view csv) {
  std::vector<CsvRow> rows = ParseCsv(csv);
  if (rows.empty()) throw DataError("audit file has no header");
  const CsvRow& header = rows[0];
  auto column = [&](std::string_view name) -> size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError("audit file lacks column '" + std::string(name) + "'");
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t id_col = column("record_id");
  const size_t verdict_col = column("paraphrase_present");
  const size_t note_col = column("note");
  std::vector<AuditEntry> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    if (row.size() != header.size()) {
      throw DataError("audit row " + std::to_string(i) + " has " +
                      std::to_string(row.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    AuditEntry e;
    e.record_id = std::string(TrimWhitespace(row[id_col]));
    e.paraphrase_present = ToLower(TrimWhitespace(row[verdict_col]));
    e.note = row[note_col];
    if (e.paraphrase_present != "yes" && e.paraphrase_present != "no" &&
        !e.paraphrase_present.empty()) {
      throw DataError("audit row " + std::to_string(i) +
                      ": paraphrase_present must be yes, no or empty, got '" +
                      row[verdict_col] + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CounterfactualRecord> ApplyAudit(
    std::vector<CounterfactualRecord> records,
    const std::vector<AuditEntry>& audit) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < records.size(); ++i) {
    index.emplace(AuditRecordId(records[i]), i);
  }
  std::unordered_set<std::string> seen;
  for (const AuditEntry& e : audit) {
    auto it = index.find(e.record_id);
    if (it == index.end()) {
      throw DataError("audit names unknown record '" + e.record_id + "'");
    }
    if (!seen.insert(e.record_id).second) {
      throw DataError("audit repeats record '" + e.record_id + "'");
    }
    if (e.paraphrase_present.empty()) continue;
    if (e.paraphrase_present != "yes" && e.paraphrase_present != "no") {
      throw DataError("malformed audit verdict '" + e.paraphrase_present + "'");
    }
    CounterfactualRecord& r = records[it->second];
    if (r.paraphrase_present == e.paraphrase_present) continue;
    if (!r.unfaithful) {
      throw DataError("record '" + e.record_id +
                      "' is not unfaithful and cannot be audited");
    }
    r.paraphrase_present = e.paraphrase_present;
    if (e.paraphrase_present == "yes") {
      r.overlap = true;
      r.unfaithful = false;
    }
  }
  return records;
}

AuditExport ExportAudit(const std::vector<std::vector<CounterfactualRecord>>& runs,
                        size_t n) {
  AuditExport out;
  out.csv = CsvLine({"record_id", "instance_id", "provenance", "field_name",
                     "token_index", "inserted_words", "original_label",
                     "perturbed_label", "original_nle", "perturbed_nle",
                     "paraphrase_present", "note"});
  size_t longest = 0;
  for (const auto& run : runs) longest = std::max(longest, run.size());
  for (size_t i = 0; i < longest; ++i) {
    for (const auto& run : runs) {
      if (i >= run.size()) continue;
      const CounterfactualRecord& r = run[i];
      if (!r.unfaithful || !r.intervention || !r.perturbed_output) continue;
      ++out.available;
      if (out.rows >= n) continue;
      ++out.rows;
      out.csv += CsvLine({AuditRecordId(r), r.instance_id,
                          std::string(ProvenanceName(r.provenance)),
                          r.intervention->field_name,
                          std::to_string(r.intervention->token_index),
                          Join(r.intervention->words, " "), r.original.label,
                          r.perturbed_output->label, r.original.nle,
                          r.perturbed_output->nle, "", ""});
    }
  }
  return out;
}

}  // namespace nlefaith
