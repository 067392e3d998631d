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

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dupbug/error.hpp"

namespace {

using dupbug::cli::RunConfig;

void add_run_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--dataset", cfg.dataset, "Dataset label used in reports");
  app.add_option("--reports", cfg.reports, "Bug reports (JSON lines)");
  app.add_option("--pairs-train", cfg.pairs_train, "Duplicate pairs CSV, training half");
  app.add_option("--pairs-test", cfg.pairs_test, "Duplicate pairs CSV, test half");
  app.add_option("--map", cfg.map, "Duplicate map CSV written by build-map");
  app.add_flag("--swap-columns", cfg.swap_columns, "Pairs files list the child in issue_id");
  app.add_option("--train-ids", cfg.train_ids, "Training id list written by split");
  app.add_option("--embedder", cfg.embedder, "native-tfidf | vector-file | vector-endpoint");
  app.add_option("--vectors", cfg.vectors, "Precomputed vectors (JSON lines)");
  app.add_option("--endpoint", cfg.endpoint, "Embedding service URL");
  app.add_option("--model-label", cfg.model_label, "Model label for reports and endpoint requests");
  app.add_option("--model", cfg.model, "TF-IDF model file written by embed");
  app.add_option("--index", cfg.index, "Index file written by index");
  app.add_option("--out", cfg.out, "Output file");
  app.add_option("--output-dir", cfg.output_dir, "Output directory");
  app.add_option("--stopwords", cfg.stopwords, "Stop-word list, one word per line");
  app.add_option("--retries", cfg.retries, "Endpoint retries after the first attempt");
  app.add_option("--timeout-ms", cfg.timeout_ms, "Endpoint request timeout");
  app.add_option("--backoff-ms", cfg.backoff_ms, "Endpoint backoff base delay");
  app.add_option("--max-in-flight", cfg.max_in_flight, "Concurrent endpoint requests");
  app.add_option("--n-grid", cfg.n_grid, "Comma separated n values (default 1,5,...,500)")
      ->join(',');
  app.add_option("--window", cfg.window, "Lookback window in days, or 'auto'");
  app.add_option("--bin-width", cfg.bin_width, "Histogram bin width in days");
  app.add_option("--id", cfg.id, "Query by issue id");
  app.add_option("--text", cfg.text, "Query by free text");
  app.add_option("--n", cfg.n, "Number of results");
  app.add_option("--date", cfg.date, "Query date for --window (YYYY-MM-DD)");
  app.add_option("--workers", cfg.workers, "Worker threads (default: all processors)");
  app.add_flag("--no-timestamp", cfg.no_timestamp, "Omit the generated_at line from summaries");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duplicate bug report retrieval and evaluation"};
  app.set_config("--config", "", "Flat key = value configuration file");
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  add_run_options(app, cfg);

  using Command = void (*)(const RunConfig&, std::ostream&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"build-map", dupbug::cli::cmd_build_map},
      {"split", dupbug::cli::cmd_split},
      {"embed", dupbug::cli::cmd_embed},
      {"index", dupbug::cli::cmd_index},
      {"query", dupbug::cli::cmd_query},
      {"evaluate", dupbug::cli::cmd_evaluate},
      {"analyze-dates", dupbug::cli::cmd_analyze_dates},
  };
  const char* help[] = {
      "Build the duplicate-to-original map from pair files",
      "Partition reports into train (parents, uniques) and test (duplicates)",
      "Fit TF-IDF, fetch endpoint vectors or validate a vector file",
      "Embed training reports and write a search index",
      "Rank indexed reports against one probe",
      "Run the retrieval evaluation and write recall curves",
      "Parent/child creation-date deltas and p85",
  };
  Command selected = nullptr;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->fallthrough();
    sub->callback([&selected, cmd = commands[i].second] { selected = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    selected(cfg, std::cout, std::cerr);
  } catch (const dupbug::Error& e) {
    std::cerr << "error (" << dupbug::to_string(e.kind()) << "): " << e.what() << '\n';
    return dupbug::cli::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
