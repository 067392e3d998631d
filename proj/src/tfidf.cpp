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

#include "dupbug/tfidf.hpp"

#include <algorithm>
#include <cmath>

#include "dupbug/error.hpp"

namespace dupbug {

TfidfModel TfidfModel::fit(const std::vector<TokenStream>& docs, std::string token_config) {
  if (docs.empty()) throw Error(ErrorKind::kValidation, "cannot fit TF-IDF on zero documents");

  std::unordered_map<std::string, std::size_t> df;
  std::vector<std::string> distinct;
  for (const auto& doc : docs) {
    distinct.assign(doc.begin(), doc.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (auto& term : distinct) ++df[term];
  }
  if (df.empty()) {
    throw Error(ErrorKind::kValidation, "cannot fit TF-IDF: corpus contains no tokens");
  }

  std::vector<std::string> terms;
  terms.reserve(df.size());
  for (const auto& [term, count] : df) terms.push_back(term);
  std::sort(terms.begin(), terms.end());

  const double n = static_cast<double>(docs.size());
  std::vector<double> idf;
  idf.reserve(terms.size());
  for (const auto& term : terms) {
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df[term]))) + 1.0);
  }
  return from_parts(std::move(terms), std::move(idf), docs.size(), std::move(token_config));
}

TfidfModel TfidfModel::from_parts(std::vector<std::string> terms, std::vector<double> idf,
                                  std::size_t document_count, std::string token_config) {
  if (terms.size() != idf.size() || terms.empty()) {
    throw Error(ErrorKind::kValidation, "TF-IDF vocabulary and weights must be non-empty and aligned");
  }
  TfidfModel model;
  model.columns_.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && !(terms[i - 1] < terms[i])) {
      throw Error(ErrorKind::kValidation, "TF-IDF vocabulary must be sorted and unique");
    }
    if (!std::isfinite(idf[i]) || idf[i] <= 0.0) {
      throw Error(ErrorKind::kValidation, "TF-IDF weights must be finite and positive");
    }
    model.columns_.emplace(terms[i], static_cast<std::uint32_t>(i));
  }
  model.terms_ = std::move(terms);
  model.idf_ = std::move(idf);
  model.document_count_ = document_count;
  model.token_config_ = std::move(token_config);
  return model;
}

std::optional<std::uint32_t> TfidfModel::column(const std::string& term) const {
  const auto it = columns_.find(term);
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

EmbeddingVector TfidfModel::embed(const TokenStream& doc) const {
  std::vector<std::uint32_t> cols;
  cols.reserve(doc.size());
  for (const auto& token : doc) {
    if (auto c = column(token)) cols.push_back(*c);
  }
  std::sort(cols.begin(), cols.end());

  std::vector<std::uint32_t> indices;
  std::vector<double> weights;
  for (std::size_t i = 0; i < cols.size();) {
    std::size_t j = i;
    while (j < cols.size() && cols[j] == cols[i]) ++j;
    indices.push_back(cols[i]);
    weights.push_back(static_cast<double>(j - i) * idf_[cols[i]]);
    i = j;
  }
  return EmbeddingVector::sparse(dim(), std::move(indices), std::move(weights)).normalized();
}

}  // namespace dupbug
