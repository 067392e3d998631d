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

#include "testing.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

namespace dupbug::testing {

namespace {

std::string make_word(std::mt19937_64& rng) {
  static constexpr char kLetters[] = "bcdfghjklmnpqrstvwxz";
  static constexpr char kVowels[] = "aeiouy";
  std::uniform_int_distribution<int> len(3, 5);
  std::uniform_int_distribution<int> consonant(0, 19);
  std::uniform_int_distribution<int> vowel(0, 5);
  std::string w;
  const int syllables = len(rng);
  for (int i = 0; i < syllables; ++i) {
    w += kLetters[consonant(rng)];
    w += kVowels[vowel(rng)];
  }
  return w;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

SyntheticCorpus make_noisy_copy_corpus(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);

  std::vector<std::string> vocab;
  {
    std::set<std::string> seen;
    while (vocab.size() < options.vocabulary) {
      auto w = make_word(rng);
      if (seen.insert(w).second) vocab.push_back(std::move(w));
    }
  }
  std::vector<double> weights(vocab.size());
  for (std::size_t r = 0; r < weights.size(); ++r) weights[r] = 1.0 / static_cast<double>(r + 1);
  std::discrete_distribution<std::size_t> zipf(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> uniform_word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> start_offset(0, 3000);

  const Date epoch = Date::from_ymd(2005, 1, 1);
  SyntheticCorpus corpus;
  std::vector<std::vector<std::string>> train_tokens;
  for (std::size_t i = 0; i < options.train_reports; ++i) {
    std::vector<std::string> tokens;
    for (std::size_t t = 0; t < options.tokens_per_report; ++t) tokens.push_back(vocab[zipf(rng)]);
    BugReport r;
    r.id = i + 1;
    r.summary = join(tokens, 0, 8);
    r.description = join(tokens, 8, tokens.size());
    r.created_at = Date{epoch.days + start_offset(rng)};
    corpus.reports.push_back(r);
    train_tokens.push_back(std::move(tokens));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> near_delta(0, 300);
  std::uniform_int_distribution<int> far_delta(720, 2000);
  const auto replace = static_cast<std::size_t>(
      std::lround(options.replace_fraction * static_cast<double>(options.tokens_per_report)));

  for (std::size_t c = 0; c < options.test_reports; ++c) {
    const std::size_t parent = c % options.parents;
    auto tokens = train_tokens[parent];
    std::vector<std::size_t> positions(tokens.size());
    for (std::size_t p = 0; p < positions.size(); ++p) positions[p] = p;
    std::shuffle(positions.begin(), positions.end(), rng);
    for (std::size_t k = 0; k < replace; ++k) tokens[positions[k]] = vocab[uniform_word(rng)];

    BugReport r;
    r.id = options.train_reports + c + 1;
    r.summary = join(tokens, 0, 8);
    r.description = join(tokens, 8, tokens.size());
    const int delta = unit(rng) < 0.85 ? near_delta(rng) : far_delta(rng);
    r.created_at = Date{corpus.reports[parent].created_at.days + delta};
    corpus.reports.push_back(r);
    corpus.pairs.push_back({r.id, corpus.reports[parent].id});
  }
  return corpus;
}

void write_reports_jsonl(const std::vector<BugReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& r : reports) {
    nlohmann::json j;
    j["id"] = r.id;
    j["summary"] = r.summary;
    j["description"] = r.description;
    j["created_at"] = r.created_at.iso();
    out << j.dump() << '\n';
  }
}

void write_pairs_csv(const std::vector<DuplicatePair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "issue_id,duplicate_id\n";
  for (const auto& p : pairs) out << p.parent_id << ',' << p.child_id << '\n';
}

std::vector<double> random_float_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  for (auto& x : v) x = static_cast<double>(static_cast<float>(x / norm));
  return v;
}

QueryResult exhaustive_rank(const std::vector<IssueId>& ids,
                            const std::vector<std::vector<double>>& vectors,
                            const std::vector<Date>& dates, const std::vector<double>& probe,
                            std::size_t n, const std::optional<DateWindow>& window) {
  QueryResult all;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (window) {
      const bool in = dates[i] <= window->query_date &&
                      window->query_date.days - dates[i].days <= window->lookback_days;
      if (!in) continue;
    }
    double s = 0.0;
    for (std::size_t d = 0; d < probe.size(); ++d) s += vectors[i][d] * probe[d];
    all.push_back({ids[i], std::clamp(s, -1.0, 1.0)});
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

CommandResult run_command(const std::filesystem::path& exe, const std::vector<std::string>& args) {
  TempDir capture;
  std::string cmd = shell_quote(exe.string());
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote((capture / "out").string()) + " 2>" + shell_quote((capture / "err").string());
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(capture / "out");
  result.err = read_file(capture / "err");
  return result;
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() / ("dupbug-test-" + std::to_string(rng()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace dupbug::testing
