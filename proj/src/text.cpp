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

#include "dupbug/text.hpp"

#include <algorithm>
#include <fstream>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

constexpr bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

constexpr char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

StopWords StopWords::english() {
  const auto& list = builtin_english_stop_words();
  std::unordered_set<std::string> words;
  for (auto w : list) words.emplace(w);
  return StopWords(std::string(kBuiltinStopListId), std::move(words));
}

StopWords StopWords::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read stop-word list " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return StopWords(path.filename().string(), std::move(words));
}

std::vector<std::string> StopWords::sorted_words() const {
  std::vector<std::string> words(words_.begin(), words_.end());
  std::sort(words.begin(), words.end());
  return words;
}

StopWords StopWords::none() { return StopWords("none", {}); }

TokenStream Tokenizer::operator()(std::string_view text) const {
  TokenStream tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= min_length_ && !stop_words_.contains(current)) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char raw : text) {
    const char c = ascii_lower(raw);
    if (is_token_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      flush();
    }
  }
  if (!current.empty()) flush();
  return tokens;
}

std::string Tokenizer::config_id() const {
  return std::string(kTokenPattern) + ";min_len=" + std::to_string(min_length_) +
         ";stop=" + stop_words_.id();
}

std::string document_text(const BugReport& report) {
  std::string text;
  text.reserve(report.summary.size() + 1 + report.description.size());
  text += report.summary;
  text += '\n';
  text += report.description;
  return text;
}

}  // namespace dupbug
