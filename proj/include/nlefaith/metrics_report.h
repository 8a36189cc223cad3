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

// Unfaithfulness rates and report rendering.
//
// Rates are kept as integer counts. Percentages are derived on demand and
// rounded half-up to two decimals only when rendered.

#ifndef NLEFAITH_METRICS_REPORT_H_
#define NLEFAITH_METRICS_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/counterfactual.h"
#include "nlefaith/reconstruction.h"

namespace nlefaith {

// 100 * num / den, or nullopt when den == 0.
std::optional<double> Percent(uint64_t num, uint64_t den);
// Half-up rounding to hundredths of a percent, computed on integers.
std::optional<int64_t> PercentHundredths(uint64_t num, uint64_t den);
// "56.70", or "" when undefined.
std::string FormatPercent(uint64_t num, uint64_t den);

struct RateRow {
  uint64_t n_total = 0;
  uint64_t n_errored = 0;
  uint64_t n_counter = 0;
  uint64_t n_unfaithful = 0;

  uint64_t n_valid() const { return n_total - n_errored; }
  std::optional<double> pct_counter() const {
    return Percent(n_counter, n_valid());
  }
  std::optional<double> pct_counter_unfaith() const {
    return Percent(n_unfaithful, n_counter);
  }
  std::optional<double> pct_total_unfaith() const {
    return Percent(n_unfaithful, n_valid());
  }

  bool operator==(const RateRow&) const = default;
};

struct ReconRow {
  uint64_t n_total = 0;
  uint64_t n_errored = 0;
  uint64_t n_reconstructed = 0;
  uint64_t n_unfaithful = 0;

  uint64_t n_valid() const { return n_total - n_errored; }
  std::optional<double> pct_reconst() const {
    return Percent(n_reconstructed, n_valid());
  }
  std::optional<double> pct_total_unfaith() const {
    return Percent(n_unfaithful, n_valid());
  }

  bool operator==(const ReconRow&) const = default;
};

// Throws DataError if the counts violate the row invariants.
void ValidateRateRow(const RateRow& row);
void ValidateReconRow(const ReconRow& row);

RateRow CounterfactualRates(const std::vector<CounterfactualRecord>& records);

// An instance counts as counter (unfaithful) if either run marks it so, and
// as errored only if both runs errored. Throws DataError unless both runs
// cover the same instance ids.
RateRow UnionRates(const std::vector<CounterfactualRecord>& rand_records,
                   const std::vector<CounterfactualRecord>& edit_records);

ReconRow ReconstructionRates(const std::vector<ReconstructionRecord>& records);

struct CounterRowLabel {
  std::string model;
  std::string dataset;
  std::string editor;  // "Rand", "Edit", "Rand+Edit", "External"
};

struct ReconRowLabel {
  std::string model;
  std::string dataset;
};

struct Report {
  std::vector<std::pair<CounterRowLabel, RateRow>> counterfactual;
  std::vector<std::pair<ReconRowLabel, ReconRow>> reconstruction;
};

enum class ReportFormat { kMarkdown, kCsv, kJson };
ReportFormat ParseReportFormat(std::string_view name);

std::string RenderReport(const Report& report, ReportFormat format);

// Audit interchange. Each unfaithful counterfactual record is identified as
// "<provenance>:<instance_id>".
std::string AuditRecordId(const CounterfactualRecord& r);

struct AuditEntry {
  std::string record_id;
  std::string paraphrase_present;  // "yes", "no" or "" (unaudited)
  std::string note;
};

// CSV with at least the columns record_id, paraphrase_present and note.
std::vector<AuditEntry> ParseAudit(std::string_view csv);

// Records judged to contain a paraphrase of W become overlapping and
// faithful. Throws DataError for unknown ids, malformed verdicts, and
// verdicts on records that are not unfaithful.
std::vector<CounterfactualRecord> ApplyAudit(
    std::vector<CounterfactualRecord> records,
    const std::vector<AuditEntry>& audit);

struct AuditExport {
  std::string csv;
  size_t rows = 0;
  size_t available = 0;
};

// The first `n` unfaithful records in dataset order. `runs` are record
// lists over the same dataset; the i-th records of every run are visited
// before the (i+1)-th.
AuditExport ExportAudit(const std::vector<std::vector<CounterfactualRecord>>& runs,
                        size_t n);

}  // namespace nlefaith

#endif  // NLEFAITH_METRICS_REPORT_H_
