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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dupbug/text.hpp"
#include "dupbug/vector.hpp"

namespace dupbug {

/// Fitted TF-IDF weights. Immutable after fit, safe for concurrent embed calls.
///
/// Columns are assigned to the distinct training terms in lexicographic order.
/// Weights use the smoothed inverse document frequency
///
///     idf(t) = ln((1 + N) / (1 + df(t))) + 1
///
/// with N the number of training documents and df(t) the number of those
/// containing t, and raw term counts as tf.
class TfidfModel {
 public:
  /// Throws ErrorKind::kValidation for an empty document list or a corpus
  /// without a single token.
  static TfidfModel fit(const std::vector<TokenStream>& docs, std::string token_config = {});

  /// Rebuilds a model from stored terms and weights (terms must be sorted and
  /// unique, weights finite and positive).
  static TfidfModel from_parts(std::vector<std::string> terms, std::vector<double> idf,
                               std::size_t document_count, std::string token_config);

  /// Sparse L2-normalized tf*idf vector over the model vocabulary.
  /// Unknown terms are dropped; a document without known terms yields an
  /// empty vector with norm 0.
  EmbeddingVector embed(const TokenStream& doc) const;

  std::uint32_t dim() const { return static_cast<std::uint32_t>(terms_.size()); }
  std::optional<std::uint32_t> column(const std::string& term) const;
  double idf(std::uint32_t column) const { return idf_[column]; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf_weights() const { return idf_; }
  std::size_t document_count() const { return document_count_; }
  const std::string& token_config() const { return token_config_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> columns_;
  std::vector<double> idf_;
  std::size_t document_count_ = 0;
  std::string token_config_;
};

inline TfidfModel fit_tfidf(const std::vector<TokenStream>& docs, std::string token_config = {}) {
  return TfidfModel::fit(docs, std::move(token_config));
}

inline EmbeddingVector embed_tfidf(const TfidfModel& model, const TokenStream& doc) {
  return model.embed(doc);
}

}  // namespace dupbug
