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
#include <string>
#include <vector>

#include "dupbug/corpus.hpp"
#include "dupbug/error.hpp"

namespace dupbug::cli {

enum class EmbedderKind { kNativeTfidf, kVectorFile, kVectorEndpoint };

/// Flat run configuration. Every field has a same-named command-line flag
/// and config-file key (`reports`, `pairs-train`, ...).
struct RunConfig {
  std::string dataset = "dataset";

  std::filesystem::path reports;
  std::filesystem::path pairs_train;
  std::filesystem::path pairs_test;
  std::filesystem::path map;
  std::filesystem::path train_ids;
  std::filesystem::path vectors;
  std::filesystem::path model;
  std::filesystem::path index;
  std::filesystem::path out;
  std::filesystem::path output_dir;
  std::filesystem::path stopwords;
  bool swap_columns = false;

  std::string embedder;  // native-tfidf | vector-file | vector-endpoint; empty = infer
  std::string endpoint;
  std::string model_label;  // report label and endpoint "model" field; empty = per-embedder default
  int retries = 3;
  int timeout_ms = 30'000;
  int backoff_ms = 250;
  int max_in_flight = 4;

  std::string n_grid;  // comma separated; empty = 1,5,10,...,500
  std::string window;  // lookback days, "auto" for the dataset default, empty = off
  int bin_width = 30;

  std::optional<IssueId> id;
  std::optional<std::string> text;
  std::size_t n = 10;
  std::string date;

  int workers = 0;
  bool no_timestamp = false;
};

/// Selected embedder. Throws ErrorKind::kConfig when the sources contradict
/// each other (more than one source, or a source that does not match an
/// explicit selection). Performs no I/O.
EmbedderKind resolve_embedder(const RunConfig& cfg);

std::vector<std::size_t> parse_n_grid(const std::string& text);

/// Lookback days, or nullopt when no window is configured.
std::optional<std::int32_t> resolve_window(const RunConfig& cfg);

/// Throws ErrorKind::kConfig naming `flag` when `path` is empty or missing.
void require_input(const std::filesystem::path& path, const char* flag);

void cmd_build_map(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_split(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_embed(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_index(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_query(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_analyze_dates(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Exit code for an error kind: 1 config, 2 input data, 3 provider, 4 I/O.
int exit_code_for(ErrorKind kind);

}  // namespace dupbug::cli
