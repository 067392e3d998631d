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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dupbug/corpus.hpp"
#include "dupbug/tfidf.hpp"
#include "dupbug/vector_source.hpp"

namespace dupbug {

/// Turns a bug report into a vector. Implementations must be safe for
/// concurrent calls; failures surface as ErrorKind::kProvider.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const BugReport& report) const = 0;
  virtual std::string label() const = 0;
};

class TfidfEmbedder final : public Embedder {
 public:
  TfidfEmbedder(Tokenizer tokenizer, TfidfModel model)
      : tokenizer_(std::move(tokenizer)), model_(std::move(model)) {}

  /// Fits on the given (training) reports only.
  static TfidfEmbedder fit(const std::vector<const BugReport*>& reports, Tokenizer tokenizer);

  EmbeddingVector embed(const BugReport& report) const override;
  EmbeddingVector embed_text(std::string_view text) const;
  std::string label() const override { return "tfidf"; }

  const TfidfModel& model() const { return model_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

  /// JSON model file holding vocabulary, weights and the tokenizer setup.
  void save(const std::filesystem::path& path) const;
  static TfidfEmbedder load(const std::filesystem::path& path);

 private:
  Tokenizer tokenizer_;
  TfidfModel model_;
};

/// Looks up precomputed vectors by issue id.
class VectorTableEmbedder final : public Embedder {
 public:
  VectorTableEmbedder(VectorTable table, std::string label)
      : table_(std::move(table)), label_(std::move(label)) {}

  EmbeddingVector embed(const BugReport& report) const override;
  std::string label() const override { return label_; }
  const VectorTable& table() const { return table_; }

 private:
  VectorTable table_;
  std::string label_;
};

/// Fetches vectors for the report text from a remote service.
class EndpointEmbedder final : public Embedder {
 public:
  explicit EndpointEmbedder(std::shared_ptr<EmbeddingEndpoint> endpoint)
      : endpoint_(std::move(endpoint)) {}

  EmbeddingVector embed(const BugReport& report) const override;
  std::string label() const override { return endpoint_->settings().model; }

 private:
  std::shared_ptr<EmbeddingEndpoint> endpoint_;
};

}  // namespace dupbug
