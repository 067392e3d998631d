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

#include "dupbug/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

using json = nlohmann::json;

int thread_count(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

struct PreparedQueries {
  std::vector<IssueId> children;
  std::vector<IssueId> parents;
  std::vector<EmbeddingVector> probes;
  std::vector<Date> dates;
  std::size_t unresolvable = 0;
  std::vector<IssueId> failed;
};

PreparedQueries prepare_queries(const EvaluationInputs& in, int workers) {
  const auto by_id = index_by_id(in.reports);
  PreparedQueries prepared;
  std::vector<const BugReport*> todo;
  for (IssueId child : in.split.test_ids) {
    const auto it = by_id.find(child);
    if (it == by_id.end() || !in.index.contains(in.map.resolve(child))) {
      ++prepared.unresolvable;
      continue;
    }
    todo.push_back(it->second);
  }

  std::vector<std::optional<EmbeddingVector>> probes(todo.size());
  std::exception_ptr fatal;
  const auto count = static_cast<std::int64_t>(todo.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count(workers))
  for (std::int64_t q = 0; q < count; ++q) {
    const auto i = static_cast<std::size_t>(q);
    try {
      probes[i] = in.embedder.embed(*todo[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kProvider) {
#pragma omp critical(dupbug_eval_fatal)
        if (!fatal) fatal = std::current_exception();
      }
    } catch (...) {
#pragma omp critical(dupbug_eval_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (!probes[i]) {
      prepared.failed.push_back(todo[i]->id);
      continue;
    }
    prepared.children.push_back(todo[i]->id);
    prepared.parents.push_back(in.map.resolve(todo[i]->id));
    prepared.probes.push_back(std::move(*probes[i]));
    prepared.dates.push_back(todo[i]->created_at);
  }
  return prepared;
}

EvaluationRun score_queries(const PreparedQueries& prepared, const SearchIndex& index,
                            std::size_t n_max, std::optional<std::int32_t> window_days,
                            int workers) {
  std::vector<std::optional<DateWindow>> windows;
  if (window_days) {
    windows.reserve(prepared.dates.size());
    for (Date d : prepared.dates) windows.push_back(DateWindow::make(d, *window_days));
  }
  auto results = query_batch(index, prepared.probes, n_max, windows, workers);

  EvaluationRun run;
  run.unresolvable_count = prepared.unresolvable;
  run.failed_ids = prepared.failed;
  run.outcomes.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::vector<IssueId> ids;
    ids.reserve(results[i].size());
    for (const auto& r : results[i]) ids.push_back(r.id);
    run.outcomes.push_back(make_outcome(prepared.children[i], prepared.parents[i], std::move(ids)));
  }
  return run;
}

void validate_grid(std::span<const std::size_t> n_values) {
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] == 0 || (i > 0 && n_values[i] <= n_values[i - 1])) {
      throw Error(ErrorKind::kValidation, "n values must be positive and strictly increasing");
    }
  }
}

}  // namespace

QueryOutcome make_outcome(IssueId child, IssueId parent, std::vector<IssueId> returned) {
  QueryOutcome outcome{child, parent, std::move(returned), std::nullopt};
  const auto it = std::find(outcome.returned_ids.begin(), outcome.returned_ids.end(), parent);
  if (it != outcome.returned_ids.end()) {
    outcome.hit_rank = static_cast<std::size_t>(it - outcome.returned_ids.begin()) + 1;
  }
  return outcome;
}

std::optional<double> RecallReport::recall_at(std::size_t n) const {
  for (const auto& p : points) {
    if (p.n == n) return p.recall;
  }
  return std::nullopt;
}

double recall_at(std::span<const QueryOutcome> outcomes, std::size_t n) {
  if (outcomes.empty()) throw Error(ErrorKind::kValidation, "recall is undefined without queries");
  if (n == 0) throw Error(ErrorKind::kValidation, "recall needs n >= 1");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(), [n](const QueryOutcome& o) {
    return o.hit_rank && *o.hit_rank <= n;
  });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::vector<std::size_t> default_n_grid() {
  std::vector<std::size_t> grid{1};
  for (std::size_t n = 5; n <= 500; n += 5) grid.push_back(n);
  return grid;
}

RecallReport recall_curve(std::span<const QueryOutcome> outcomes,
                          std::span<const std::size_t> n_values) {
  validate_grid(n_values);
  RecallReport report;
  report.query_count = outcomes.size();
  for (std::size_t n : n_values) report.points.push_back({n, recall_at(outcomes, n)});
  return report;
}

EvaluationRun run_evaluation(const EvaluationInputs& in, std::size_t n_max,
                             std::optional<std::int32_t> window_days, int workers) {
  const auto prepared = prepare_queries(in, workers);
  return score_queries(prepared, in.index, n_max, window_days, workers);
}

WindowedComparison windowed_comparison(const EvaluationInputs& in, std::size_t n_max,
                                       std::int32_t window_days, int workers) {
  if (window_days <= 0) throw Error(ErrorKind::kValidation, "lookback days must be positive");
  const auto prepared = prepare_queries(in, workers);
  return {score_queries(prepared, in.index, n_max, std::nullopt, workers),
          score_queries(prepared, in.index, n_max, window_days, workers)};
}

RecallReport make_report(const EvaluationRun& run, std::span<const std::size_t> n_values,
                         std::string dataset, std::string model,
                         std::optional<std::int32_t> window_days) {
  RecallReport report;
  if (!run.outcomes.empty()) {
    report = recall_curve(run.outcomes, n_values);
  } else {
    validate_grid(n_values);
  }
  report.dataset = std::move(dataset);
  report.model = std::move(model);
  report.window_days = window_days;
  report.unresolvable_count = run.unresolvable_count;
  return report;
}

RecallReport pooled_report(std::span<const EvaluationRun* const> runs,
                           std::span<const std::size_t> n_values, std::string model,
                           std::optional<std::int32_t> window_days) {
  EvaluationRun pooled;
  for (const EvaluationRun* run : runs) {
    pooled.outcomes.insert(pooled.outcomes.end(), run->outcomes.begin(), run->outcomes.end());
    pooled.unresolvable_count += run->unresolvable_count;
  }
  return make_report(pooled, n_values, "pooled", std::move(model), window_days);
}

std::optional<std::int32_t> default_window_days(std::string_view dataset) {
  std::string key(dataset);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key == "firefox") return 1080;
  if (key == "eclipse" || key == "eclipseplatform") return 720;
  if (key == "mozillacore") return 900;
  if (key == "jdt") return 720;
  if (key == "thunderbird") return 1440;
  return std::nullopt;
}

void write_reports_csv(std::span<const RecallReport> reports, std::ostream& out) {
  out << "dataset,model,window_days,n,recall,query_count,unresolvable_count\n";
  for (const auto& report : reports) {
    auto points = report.points;
    std::sort(points.begin(), points.end(),
              [](const RecallPoint& a, const RecallPoint& b) { return a.n < b.n; });
    const std::string window = report.window_days ? std::to_string(*report.window_days) : "";
    for (const auto& p : points) {
      out << csv_field(report.dataset) << ',' << csv_field(report.model) << ',' << window << ','
          << p.n << ',' << format_double(p.recall) << ',' << report.query_count << ','
          << report.unresolvable_count << '\n';
    }
  }
}

void write_report_json(const RecallReport& report, std::ostream& out) {
  json doc;
  doc["dataset"] = report.dataset;
  doc["model"] = report.model;
  doc["window_days"] = report.window_days ? json(*report.window_days) : json(nullptr);
  doc["query_count"] = report.query_count;
  doc["unresolvable_count"] = report.unresolvable_count;
  doc["points"] = json::array();
  for (const auto& p : report.points) doc["points"].push_back({{"n", p.n}, {"recall", p.recall}});
  out << doc.dump(2) << '\n';
}

RecallReport read_report_json(std::istream& in) {
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::kInput, "recall report is not a JSON object");
  }
  try {
    RecallReport report;
    report.dataset = doc.at("dataset").get<std::string>();
    report.model = doc.at("model").get<std::string>();
    if (!doc.at("window_days").is_null()) {
      report.window_days = doc.at("window_days").get<std::int32_t>();
    }
    report.query_count = doc.at("query_count").get<std::size_t>();
    report.unresolvable_count = doc.at("unresolvable_count").get<std::size_t>();
    for (const auto& p : doc.at("points")) {
      report.points.push_back({p.at("n").get<std::size_t>(), p.at("recall").get<double>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInput, std::string("malformed recall report: ") + e.what());
  }
}

void emit_report(const RecallReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  if (report.points.empty()) {
    std::cerr << "warning: recall report for '" << report.dataset << "' has no points\n";
  }
  if (format == ReportFormat::kCsv) {
    write_reports_csv(std::span(&report, 1), out);
  } else {
    write_report_json(report, out);
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::int32_t DateDeltaStats::percentile(double p) const {
  if (deltas.empty()) throw Error(ErrorKind::kValidation, "percentile of an empty delta set");
  if (!(p > 0.0 && p <= 100.0)) throw Error(ErrorKind::kValidation, "percentile must be in (0, 100]");
  auto sorted = deltas;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<HistogramBin> DateDeltaStats::histogram(std::int32_t bin_width) const {
  if (bin_width <= 0) throw Error(ErrorKind::kValidation, "histogram bin width must be positive");
  std::vector<HistogramBin> bins;
  for (std::int32_t d : deltas) {
    if (d < 0) continue;
    const auto bin = static_cast<std::size_t>(d / bin_width);
    while (bins.size() <= bin) {
      const auto start = static_cast<std::int32_t>(bins.size()) * bin_width;
      bins.push_back({start, start + bin_width, 0});
    }
    ++bins[bin].count;
  }
  return bins;
}

DateDeltaStats date_delta_analysis(const std::vector<BugReport>& reports, const DupOrgMap& map) {
  const auto by_id = index_by_id(reports);
  DateDeltaStats stats;
  for (const auto& [child, parent] : map.entries()) {
    const auto c = by_id.find(child);
    const auto p = by_id.find(parent);
    if (c == by_id.end() || p == by_id.end()) {
      ++stats.skipped;
      continue;
    }
    const auto delta = c->second->created_at.days_since(p->second->created_at);
    if (delta < 0) ++stats.negative_count;
    stats.child_ids.push_back(child);
    stats.deltas.push_back(delta);
  }
  return stats;
}

void write_histogram_csv(const DateDeltaStats& stats, std::int32_t bin_width, std::ostream& out) {
  out << "bin_start_days,bin_end_days,count\n";
  if (stats.negative_count > 0) {
    const auto min = *std::min_element(stats.deltas.begin(), stats.deltas.end());
    out << min << ",0," << stats.negative_count << '\n';
  }
  for (const auto& bin : stats.histogram(bin_width)) {
    out << bin.start_days << ',' << bin.end_days << ',' << bin.count << '\n';
  }
  if (stats.total() > 0) out << "p85," << stats.percentile(85.0) << ',' << stats.total() << '\n';
}

}  // namespace dupbug
