// Copyright 2026-present the dupbug authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dupbug/corpus.hpp"
#include "dupbug/embedder.hpp"
#include "dupbug/index.hpp"

namespace dupbug {

struct QueryOutcome {
  IssueId child_id = 0;
  IssueId expected_parent_id = 0;
  std::vector<IssueId> returned_ids;
  std::optional<std::size_t> hit_rank;  // 1-based position of the expected parent

  friend bool operator==(const QueryOutcome&, const QueryOutcome&) = default;
};

/// Outcome for one query given its ranked ids. Only the canonical parent
/// counts as a hit.
QueryOutcome make_outcome(IssueId child, IssueId parent, std::vector<IssueId> returned);

struct RecallPoint {
  std::size_t n = 0;
  double recall = 0.0;

  friend bool operator==(const RecallPoint&, const RecallPoint&) = default;
};

struct RecallReport {
  std::string dataset;
  std::string model;
  std::optional<std::int32_t> window_days;
  std::vector<RecallPoint> points;  // ascending n
  std::size_t query_count = 0;
  std::size_t unresolvable_count = 0;

  std::optional<double> recall_at(std::size_t n) const;

  friend bool operator==(const RecallReport&, const RecallReport&) = default;
};

/// Fraction of outcomes whose parent sits within the first n results.
/// Throws ErrorKind::kValidation for an empty outcome list or n == 0.
double recall_at(std::span<const QueryOutcome> outcomes, std::size_t n);

/// 1, then 5 to 500 in steps of 5.
std::vector<std::size_t> default_n_grid();

/// One point per n; `n_values` must be strictly increasing and positive.
RecallReport recall_curve(std::span<const QueryOutcome> outcomes,
                          std::span<const std::size_t> n_values);

struct EvaluationInputs {
  const std::vector<BugReport>& reports;
  const CorpusSplit& split;
  const DupOrgMap& map;
  const SearchIndex& index;
  const Embedder& embedder;
};

struct EvaluationRun {
  std::vector<QueryOutcome> outcomes;  // ascending child id
  std::size_t unresolvable_count = 0;  // parent absent from the index
  std::vector<IssueId> failed_ids;     // embedder could not produce a probe
};

/// Embeds every test report and queries the index for its top `n_max`
/// neighbours, optionally restricted to the `window_days` before the child's
/// creation date. Embedding and querying fan out over `workers` threads;
/// results do not depend on the thread count.
EvaluationRun run_evaluation(const EvaluationInputs& in, std::size_t n_max,
                             std::optional<std::int32_t> window_days = std::nullopt,
                             int workers = 0);

struct WindowedComparison {
  EvaluationRun unwindowed;
  EvaluationRun windowed;
};

/// Same query set evaluated with and without a `window_days` lookback.
WindowedComparison windowed_comparison(const EvaluationInputs& in, std::size_t n_max,
                                       std::int32_t window_days, int workers = 0);

RecallReport make_report(const EvaluationRun& run, std::span<const std::size_t> n_values,
                         std::string dataset, std::string model,
                         std::optional<std::int32_t> window_days);

/// Micro-average over all queries of several runs (one per dataset).
RecallReport pooled_report(std::span<const EvaluationRun* const> runs,
                           std::span<const std::size_t> n_values, std::string model,
                           std::optional<std::int32_t> window_days);

/// Lookback defaults per dataset, in days.
std::optional<std::int32_t> default_window_days(std::string_view dataset);

enum class ReportFormat { kCsv, kJson };

/// CSV columns: dataset,model,window_days,n,recall,query_count,unresolvable_count.
void write_reports_csv(std::span<const RecallReport> reports, std::ostream& out);
void write_report_json(const RecallReport& report, std::ostream& out);
RecallReport read_report_json(std::istream& in);

/// Writes one report. A report without points produces a header-only CSV
/// and a warning on stderr.
void emit_report(const RecallReport& report, ReportFormat format,
                 const std::filesystem::path& path);

struct HistogramBin {
  std::int32_t start_days = 0;  // inclusive
  std::int32_t end_days = 0;    // exclusive
  std::size_t count = 0;
};

struct DateDeltaStats {
  std::vector<IssueId> child_ids;    // ascending
  std::vector<std::int32_t> deltas;  // child.created_at - parent.created_at, aligned with child_ids
  std::size_t negative_count = 0;
  std::size_t skipped = 0;  // child or parent missing from the report list

  std::size_t total() const { return deltas.size(); }

  /// Nearest-rank percentile over all deltas, p in (0, 100].
  std::int32_t percentile(double p) const;

  /// Contiguous bins of `bin_width` days from 0 over the non-negative deltas.
  /// Negative deltas are not binned; see negative_count.
  std::vector<HistogramBin> histogram(std::int32_t bin_width) const;
};

DateDeltaStats date_delta_analysis(const std::vector<BugReport>& reports, const DupOrgMap& map);

/// `bin_start_days,bin_end_days,count` rows (a leading row for negative deltas
/// when any exist) and a trailing `p85,<days>,<total>` row.
void write_histogram_csv(const DateDeltaStats& stats, std::int32_t bin_width, std::ostream& out);

}  // namespace dupbug
