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
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dupbug/corpus.hpp"

namespace dupbug {

/// Token pattern applied after ASCII lower-casing. Every maximal run of
/// `[a-z0-9]` matches one of the two alternatives, so the scanner splits on
/// everything else.
inline constexpr std::string_view kTokenPattern = "[a-z][a-z0-9]*|[0-9]+[a-z0-9]*";
inline constexpr std::size_t kMinTokenLength = 2;
inline constexpr std::string_view kBuiltinStopListId = "english-318";

/// The shipped English stop-word list, sorted.
const std::vector<std::string_view>& builtin_english_stop_words();

class StopWords {
 public:
  /// The built-in 318-word English list.
  static StopWords english();
  /// One lowercase word per line; blank lines ignored. Identifier is the file name.
  static StopWords from_file(const std::filesystem::path& path);
  static StopWords none();

  StopWords(std::string id, std::unordered_set<std::string> words)
      : id_(std::move(id)), words_(std::move(words)) {}

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  const std::string& id() const { return id_; }
  std::size_t size() const { return words_.size(); }
  std::vector<std::string> sorted_words() const;

 private:
  std::string id_;
  std::unordered_set<std::string> words_;
};

using TokenStream = std::vector<std::string>;

class Tokenizer {
 public:
  explicit Tokenizer(StopWords stop_words = StopWords::english(),
                     std::size_t min_length = kMinTokenLength)
      : stop_words_(std::move(stop_words)), min_length_(min_length) {}

  /// Lower-cases, extracts pattern tokens of at least `min_length`
  /// characters and removes stop words. Order is preserved.
  TokenStream operator()(std::string_view text) const;

  const StopWords& stop_words() const { return stop_words_; }
  std::size_t min_length() const { return min_length_; }

  /// Provenance string recorded in fitted models.
  std::string config_id() const;

 private:
  StopWords stop_words_;
  std::size_t min_length_;
};

/// Summary, a newline, then the description.
std::string document_text(const BugReport& report);

}  // namespace dupbug
