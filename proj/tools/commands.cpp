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

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dupbug/corpus.hpp"
#include "dupbug/embedder.hpp"
#include "dupbug/error.hpp"
#include "dupbug/eval.hpp"
#include "dupbug/index.hpp"
#include "dupbug/text.hpp"
#include "dupbug/vector_source.hpp"

namespace dupbug::cli {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

int thread_count(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

std::vector<BugReport> load_reports(const RunConfig& cfg, std::ostream& err) {
  require_input(cfg.reports, "--reports");
  auto parsed = parse_reports(cfg.reports);
  if (parsed.skipped > 0) err << "warning: skipped " << parsed.skipped << " malformed report record(s)\n";
  if (parsed.duplicate_ids > 0) {
    err << "warning: ignored " << parsed.duplicate_ids << " report(s) with an already seen id\n";
  }
  return std::move(parsed.reports);
}

struct BuiltMap {
  DupOrgMap map;
  std::size_t demotions = 0;
  std::size_t self_pairs = 0;
  std::size_t skipped_rows = 0;
};

BuiltMap build_map_from_pairs(const RunConfig& cfg) {
  require_input(cfg.pairs_train, "--pairs-train");
  BuiltMap built;
  auto train = parse_pairs(cfg.pairs_train, cfg.swap_columns);
  MapBuildStats train_stats;
  const DupOrgMap train_map = build_intermediate_map(train.pairs, &train_stats);
  built.self_pairs += train.self_pairs;
  built.skipped_rows += train.skipped;
  built.demotions += train_stats.demotions;
  built.map = train_map;

  if (!cfg.pairs_test.empty()) {
    require_input(cfg.pairs_test, "--pairs-test");
    auto test = parse_pairs(cfg.pairs_test, cfg.swap_columns);
    MapBuildStats test_stats, merge_stats;
    const DupOrgMap test_map = build_intermediate_map(test.pairs, &test_stats);
    built.map = merge_maps(train_map, test_map, &merge_stats);
    built.self_pairs += test.self_pairs;
    built.skipped_rows += test.skipped;
    built.demotions += test_stats.demotions + merge_stats.demotions;
  }
  return built;
}

DupOrgMap load_map(const RunConfig& cfg) {
  if (!cfg.map.empty()) {
    require_input(cfg.map, "--map");
    return read_map_csv(cfg.map);
  }
  if (!cfg.pairs_train.empty()) return build_map_from_pairs(cfg).map;
  config_error("a duplicate map is required: pass --map or --pairs-train");
}

std::set<IssueId> load_train_ids(const RunConfig& cfg, const std::vector<BugReport>& reports) {
  if (!cfg.train_ids.empty()) {
    require_input(cfg.train_ids, "--train-ids");
    return read_id_list(cfg.train_ids);
  }
  return split_corpus(reports, load_map(cfg)).train_ids;
}

Tokenizer make_tokenizer(const RunConfig& cfg) {
  if (cfg.stopwords.empty()) return Tokenizer();
  require_input(cfg.stopwords, "--stopwords");
  return Tokenizer(StopWords::from_file(cfg.stopwords));
}

std::string model_label(const RunConfig& cfg, EmbedderKind kind) {
  if (!cfg.model_label.empty()) return cfg.model_label;
  switch (kind) {
    case EmbedderKind::kNativeTfidf: return "tfidf";
    case EmbedderKind::kVectorFile: return "vectors";
    case EmbedderKind::kVectorEndpoint: return "endpoint";
  }
  return "unknown";
}

std::shared_ptr<EmbeddingEndpoint> make_endpoint(const RunConfig& cfg) {
  EndpointSettings settings;
  settings.url = cfg.endpoint;
  settings.model = model_label(cfg, EmbedderKind::kVectorEndpoint);
  settings.retries = cfg.retries;
  settings.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  settings.backoff_base = std::chrono::milliseconds(cfg.backoff_ms);
  settings.max_in_flight = cfg.max_in_flight;
  if (const char* token = std::getenv("DUPBUG_ENDPOINT_TOKEN")) settings.bearer_token = token;
  return std::make_shared<EmbeddingEndpoint>(std::move(settings));
}

std::vector<const BugReport*> select(const std::vector<BugReport>& reports,
                                     const std::set<IssueId>& ids) {
  std::vector<const BugReport*> out;
  for (const auto& r : reports) {
    if (ids.contains(r.id)) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(),
            [](const BugReport* a, const BugReport* b) { return a->id < b->id; });
  return out;
}

// Embeds reports concurrently. Missing vectors (provider errors) are skipped
// when `skip_missing` is set and fatal otherwise.
std::vector<IndexItem> embed_items(const Embedder& embedder,
                                   const std::vector<const BugReport*>& reports, int workers,
                                   bool skip_missing, std::size_t& skipped) {
  std::vector<std::optional<EmbeddingVector>> vectors(reports.size());
  std::exception_ptr fatal;
  const auto count = static_cast<std::int64_t>(reports.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count(workers))
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      vectors[static_cast<std::size_t>(i)] = embedder.embed(*reports[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      if (!(skip_missing && e.kind() == ErrorKind::kProvider)) {
#pragma omp critical(dupbug_cli_fatal)
        if (!fatal) fatal = std::current_exception();
      }
    } catch (...) {
#pragma omp critical(dupbug_cli_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  std::vector<IndexItem> items;
  skipped = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!vectors[i]) {
      ++skipped;
      continue;
    }
    items.push_back({reports[i]->id, std::move(*vectors[i]), reports[i]->created_at});
  }
  return items;
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg, EmbedderKind kind,
                                        const std::vector<BugReport>* reports,
                                        const std::set<IssueId>* train_ids) {
  switch (kind) {
    case EmbedderKind::kNativeTfidf:
      if (!cfg.model.empty()) {
        require_input(cfg.model, "--model");
        return std::make_unique<TfidfEmbedder>(TfidfEmbedder::load(cfg.model));
      }
      if (reports == nullptr || train_ids == nullptr) {
        config_error("native-tfidf needs --model (written by `embed`)");
      }
      return std::make_unique<TfidfEmbedder>(
          TfidfEmbedder::fit(select(*reports, *train_ids), make_tokenizer(cfg)));
    case EmbedderKind::kVectorFile:
      require_input(cfg.vectors, "--vectors");
      return std::make_unique<VectorTableEmbedder>(load_vector_file(cfg.vectors),
                                                   model_label(cfg, kind));
    case EmbedderKind::kVectorEndpoint:
      return std::make_unique<EndpointEmbedder>(make_endpoint(cfg));
  }
  config_error("unknown embedder");
}

void ensure_dir(const fs::path& dir, const char* flag) {
  if (dir.empty()) config_error(std::string(flag) + " is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

EmbedderKind resolve_embedder(const RunConfig& cfg) {
  const bool has_vectors = !cfg.vectors.empty();
  const bool has_endpoint = !cfg.endpoint.empty();
  if (has_vectors && has_endpoint) {
    config_error("both --vectors and --endpoint are set; select exactly one embedder source");
  }
  if (cfg.embedder.empty()) {
    if (has_vectors) return EmbedderKind::kVectorFile;
    if (has_endpoint) return EmbedderKind::kVectorEndpoint;
    return EmbedderKind::kNativeTfidf;
  }
  if (cfg.embedder == "native-tfidf") {
    if (has_vectors || has_endpoint) {
      config_error("--embedder native-tfidf conflicts with --vectors/--endpoint");
    }
    return EmbedderKind::kNativeTfidf;
  }
  if (cfg.embedder == "vector-file") {
    if (has_endpoint) config_error("--embedder vector-file conflicts with --endpoint");
    return EmbedderKind::kVectorFile;
  }
  if (cfg.embedder == "vector-endpoint") {
    if (has_vectors) config_error("--embedder vector-endpoint conflicts with --vectors");
    if (!has_endpoint) config_error("--embedder vector-endpoint needs --endpoint");
    return EmbedderKind::kVectorEndpoint;
  }
  config_error("unknown embedder '" + cfg.embedder +
               "' (expected native-tfidf, vector-file or vector-endpoint)");
}

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  if (text.empty()) return default_n_grid();
  std::vector<std::size_t> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (ec != std::errc{} || ptr != item.data() + item.size() || n == 0 ||
        (!grid.empty() && n <= grid.back())) {
      config_error("--n-grid must list strictly increasing positive integers");
    }
    grid.push_back(n);
  }
  if (grid.empty()) config_error("--n-grid is empty");
  return grid;
}

std::optional<std::int32_t> resolve_window(const RunConfig& cfg) {
  if (cfg.window.empty()) return std::nullopt;
  if (cfg.window == "auto") {
    const auto d = default_window_days(cfg.dataset);
    if (!d) config_error("no default lookback for dataset '" + cfg.dataset + "'; pass --window <days>");
    return d;
  }
  std::int32_t days = 0;
  auto [ptr, ec] = std::from_chars(cfg.window.data(), cfg.window.data() + cfg.window.size(), days);
  if (ec != std::errc{} || ptr != cfg.window.data() + cfg.window.size() || days <= 0) {
    config_error("--window must be a positive number of days or 'auto'");
  }
  return days;
}

void require_input(const std::filesystem::path& path, const char* flag) {
  if (path.empty()) config_error(std::string(flag) + " is required");
  if (!fs::exists(path)) config_error(std::string(flag) + " path does not exist: " + path.string());
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 1;
    case ErrorKind::kInput:
    case ErrorKind::kFormat:
    case ErrorKind::kValidation: return 2;
    case ErrorKind::kProvider: return 3;
    case ErrorKind::kIo: return 4;
  }
  return 2;
}

void cmd_build_map(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.out.empty()) config_error("--out is required");
  require_input(cfg.pairs_train, "--pairs-train");
  if (!cfg.pairs_test.empty()) require_input(cfg.pairs_test, "--pairs-test");

  const BuiltMap built = build_map_from_pairs(cfg);
  if (built.self_pairs > 0) err << "warning: skipped " << built.self_pairs << " self-pair row(s)\n";
  if (built.skipped_rows > 0) err << "warning: skipped " << built.skipped_rows << " malformed row(s)\n";
  write_map_csv(built.map, cfg.out);
  out << "keys: " << built.map.size() << '\n'
      << "sibling demotions: " << built.demotions << '\n'
      << "warnings: " << built.self_pairs + built.skipped_rows << '\n';
}

void cmd_split(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.reports, "--reports");
  if (cfg.map.empty()) require_input(cfg.pairs_train, "--pairs-train");
  if (cfg.output_dir.empty()) config_error("--output-dir is required");

  const auto reports = load_reports(cfg, err);
  const auto split = split_corpus(reports, load_map(cfg));
  ensure_dir(cfg.output_dir, "--output-dir");
  write_id_list(split.train_ids, cfg.output_dir / "train.txt");
  write_id_list(split.test_ids, cfg.output_dir / "test.txt");
  std::set<IssueId> unresolvable = split.unresolvable_ids;
  unresolvable.insert(split.absent_keys.begin(), split.absent_keys.end());
  write_id_list(unresolvable, cfg.output_dir / "unresolvable.txt");
  out << "train: " << split.train_ids.size() << '\n'
      << "test: " << split.test_ids.size() << '\n'
      << "unresolvable: " << split.unresolvable_ids.size() << " (parent missing), "
      << split.absent_keys.size() << " (duplicate missing)\n";
}

void cmd_embed(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EmbedderKind kind = resolve_embedder(cfg);
  switch (kind) {
    case EmbedderKind::kNativeTfidf: {
      if (cfg.out.empty()) config_error("--out is required (TF-IDF model file)");
      const auto reports = load_reports(cfg, err);
      const auto train = load_train_ids(cfg, reports);
      const auto embedder = TfidfEmbedder::fit(select(reports, train), make_tokenizer(cfg));
      embedder.save(cfg.out);
      out << "documents: " << embedder.model().document_count() << '\n'
          << "vocabulary: " << embedder.model().dim() << '\n';
      return;
    }
    case EmbedderKind::kVectorFile: {
      require_input(cfg.vectors, "--vectors");
      const auto table = load_vector_file(cfg.vectors);
      if (!cfg.out.empty()) write_vector_file(table, cfg.out);
      out << "vectors: " << table.size() << '\n'
          << "dim: " << (table.empty() ? 0 : table.begin()->second.dim()) << '\n';
      return;
    }
    case EmbedderKind::kVectorEndpoint: {
      if (cfg.out.empty()) config_error("--out is required (vector file)");
      const auto reports = load_reports(cfg, err);
      const EndpointEmbedder embedder(make_endpoint(cfg));
      std::vector<const BugReport*> all;
      for (const auto& r : reports) all.push_back(&r);
      std::size_t skipped = 0;
      auto items = embed_items(embedder, all, cfg.workers, false, skipped);
      VectorTable table;
      for (auto& item : items) table.emplace(item.id, std::move(item.vector));
      write_vector_file(table, cfg.out);
      out << "vectors: " << table.size() << '\n';
      return;
    }
  }
}

void cmd_index(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EmbedderKind kind = resolve_embedder(cfg);
  if (cfg.out.empty()) config_error("--out is required (index file)");
  if (kind == EmbedderKind::kNativeTfidf && cfg.model.empty()) {
    config_error("--model is required for native-tfidf (run `embed` first)");
  }
  const auto reports = load_reports(cfg, err);
  const auto train = load_train_ids(cfg, reports);
  const auto embedder = make_embedder(cfg, kind, &reports, &train);

  std::size_t skipped = 0;
  auto items = embed_items(*embedder, select(reports, train), cfg.workers,
                           kind == EmbedderKind::kVectorFile, skipped);
  if (skipped > 0) err << "warning: " << skipped << " training report(s) have no vector\n";
  const auto index = build_index(std::move(items));
  index.save(cfg.out);
  out << "entries: " << index.size() << '\n' << "dim: " << index.dim() << '\n';
}

void cmd_query(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EmbedderKind kind = resolve_embedder(cfg);
  if (cfg.id.has_value() == cfg.text.has_value()) config_error("pass exactly one of --id or --text");
  if (cfg.n == 0) config_error("--n must be positive");
  const auto window_days = resolve_window(cfg);
  if (kind == EmbedderKind::kVectorFile && cfg.text) {
    config_error("--text needs an embedder that can embed text (native-tfidf or vector-endpoint)");
  }
  if (kind == EmbedderKind::kNativeTfidf && cfg.model.empty()) config_error("--model is required");
  require_input(cfg.index, "--index");

  std::optional<Date> query_date;
  if (!cfg.date.empty()) {
    query_date = Date::parse(cfg.date);
    if (!query_date) config_error("--date must be YYYY-MM-DD");
  }

  const auto index = SearchIndex::load(cfg.index);
  const auto embedder = make_embedder(cfg, kind, nullptr, nullptr);

  EmbeddingVector probe;
  if (cfg.text) {
    if (kind == EmbedderKind::kNativeTfidf) {
      probe = static_cast<const TfidfEmbedder&>(*embedder).embed_text(*cfg.text);
    } else {
      probe = make_endpoint(cfg)->fetch(*cfg.text);
    }
  } else {
    BugReport report;
    report.id = *cfg.id;
    if (!cfg.reports.empty()) {
      const auto reports = load_reports(cfg, err);
      const auto it = std::find_if(reports.begin(), reports.end(),
                                   [&](const BugReport& r) { return r.id == *cfg.id; });
      if (it == reports.end()) {
        throw Error(ErrorKind::kInput, "issue " + std::to_string(*cfg.id) + " not in --reports");
      }
      report = *it;
      if (!query_date) query_date = report.created_at;
    } else if (kind != EmbedderKind::kVectorFile) {
      config_error("--id needs --reports to look up the report text");
    }
    probe = embedder->embed(report);
  }

  std::optional<DateWindow> window;
  if (window_days) {
    if (!query_date) config_error("--window needs --date (or --id with --reports)");
    window = DateWindow::make(*query_date, *window_days);
  }
  for (const auto& hit : query(index, probe, cfg.n, window, cfg.workers)) {
    out << hit.id << '\t' << fixed(hit.score, 6) << '\n';
  }
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  // Validation that needs no I/O comes first.
  const EmbedderKind kind = resolve_embedder(cfg);
  const auto grid = parse_n_grid(cfg.n_grid);
  const auto window_days = resolve_window(cfg);
  if (cfg.output_dir.empty()) config_error("--output-dir is required");
  require_input(cfg.reports, "--reports");
  if (cfg.map.empty()) require_input(cfg.pairs_train, "--pairs-train");
  if (kind == EmbedderKind::kVectorFile) require_input(cfg.vectors, "--vectors");

  const auto reports = load_reports(cfg, err);
  const auto map = load_map(cfg);
  const auto split = split_corpus(reports, map);
  const auto embedder = make_embedder(cfg, kind, &reports, &split.train_ids);
  const std::string label = model_label(cfg, kind);

  std::size_t skipped = 0;
  auto items = embed_items(*embedder, select(reports, split.train_ids), cfg.workers,
                           kind == EmbedderKind::kVectorFile, skipped);
  if (skipped > 0) err << "warning: " << skipped << " training report(s) have no vector\n";
  const auto index = build_index(std::move(items));

  const EvaluationInputs inputs{reports, split, map, index, *embedder};
  const std::size_t n_max = grid.back();
  std::vector<RecallReport> curves;
  std::optional<EvaluationRun> windowed;
  EvaluationRun unwindowed;
  if (window_days) {
    auto cmp = windowed_comparison(inputs, n_max, *window_days, cfg.workers);
    unwindowed = std::move(cmp.unwindowed);
    windowed = std::move(cmp.windowed);
  } else {
    unwindowed = run_evaluation(inputs, n_max, std::nullopt, cfg.workers);
  }
  if (unwindowed.outcomes.empty()) {
    throw Error(ErrorKind::kInput, "no scorable test queries (check the map and report ids)");
  }
  curves.push_back(make_report(unwindowed, grid, cfg.dataset, label, std::nullopt));
  if (windowed) curves.push_back(make_report(*windowed, grid, cfg.dataset, label, window_days));
  for (auto& curve : curves) curve.unresolvable_count += split.unresolvable_ids.size();

  ensure_dir(cfg.output_dir, "--output-dir");
  {
    auto csv = open_out(cfg.output_dir / "recall_curve.csv");
    write_reports_csv(curves, csv);
  }
  emit_report(curves[0], ReportFormat::kJson, cfg.output_dir / "recall_curve.json");
  if (windowed) emit_report(curves[1], ReportFormat::kJson, cfg.output_dir / "recall_curve_windowed.json");

  const auto deltas = date_delta_analysis(reports, map);
  std::ostringstream summary;
  if (!cfg.no_timestamp) summary << "generated_at: " << utc_now() << '\n';
  summary << "dataset: " << cfg.dataset << '\n'
          << "model: " << label << '\n'
          << "train: " << split.train_ids.size() << '\n'
          << "test: " << split.test_ids.size() << '\n'
          << "scored: " << unwindowed.outcomes.size() << '\n'
          << "unresolvable: " << unwindowed.unresolvable_count + split.unresolvable_ids.size() << '\n'
          << "failed: " << unwindowed.failed_ids.size() << '\n';
  if (n_max >= 5) {
    summary << "recall@5: " << fixed(recall_at(unwindowed.outcomes, 5)) << '\n';
    if (windowed && !windowed->outcomes.empty()) {
      summary << "recall@5 (window " << *window_days
              << " days): " << fixed(recall_at(windowed->outcomes, 5)) << '\n';
    }
  }
  if (deltas.total() > 0) summary << "p85 creation delta (days): " << deltas.percentile(85) << '\n';

  auto summary_file = open_out(cfg.output_dir / "summary.txt");
  summary_file << summary.str();
  out << summary.str();
}

void cmd_analyze_dates(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.reports, "--reports");
  if (cfg.map.empty()) require_input(cfg.pairs_train, "--pairs-train");
  if (cfg.out.empty()) config_error("--out is required (histogram CSV)");
  if (cfg.bin_width <= 0) config_error("--bin-width must be positive");

  const auto reports = load_reports(cfg, err);
  const auto stats = date_delta_analysis(reports, load_map(cfg));
  {
    auto csv = open_out(cfg.out);
    write_histogram_csv(stats, cfg.bin_width, csv);
  }
  out << "pairs: " << stats.total() << '\n'
      << "negative: " << stats.negative_count << '\n'
      << "skipped: " << stats.skipped << '\n';
  if (stats.total() > 0) out << "p85: " << stats.percentile(85) << '\n';
}

}  // namespace dupbug::cli
