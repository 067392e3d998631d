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

#include "dupbug/embedder.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

using json = nlohmann::json;

constexpr std::string_view kModelFormat = "dupbug-tfidf";
constexpr int kModelVersion = 1;

}  // namespace

TfidfEmbedder TfidfEmbedder::fit(const std::vector<const BugReport*>& reports,
                                 Tokenizer tokenizer) {
  std::vector<TokenStream> docs;
  docs.reserve(reports.size());
  for (const BugReport* r : reports) docs.push_back(tokenizer(document_text(*r)));
  auto model = TfidfModel::fit(docs, tokenizer.config_id());
  return TfidfEmbedder(std::move(tokenizer), std::move(model));
}

EmbeddingVector TfidfEmbedder::embed(const BugReport& report) const {
  return embed_text(document_text(report));
}

EmbeddingVector TfidfEmbedder::embed_text(std::string_view text) const {
  return model_.embed(tokenizer_(text));
}

void TfidfEmbedder::save(const std::filesystem::path& path) const {
  json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["token_config"] = model_.token_config();
  doc["min_token_length"] = tokenizer_.min_length();
  doc["stop_list_id"] = tokenizer_.stop_words().id();
  doc["stop_words"] = tokenizer_.stop_words().sorted_words();
  doc["document_count"] = model_.document_count();
  doc["terms"] = model_.terms();
  doc["idf"] = model_.idf_weights();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

TfidfEmbedder TfidfEmbedder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("format", "") != kModelFormat) {
    throw Error(ErrorKind::kFormat, path.string() + " is not a TF-IDF model file");
  }
  if (doc.value("version", 0) != kModelVersion) {
    throw Error(ErrorKind::kFormat, "unsupported TF-IDF model version in " + path.string());
  }
  try {
    const auto words = doc.at("stop_words").get<std::vector<std::string>>();
    StopWords stop(doc.at("stop_list_id").get<std::string>(),
                   std::unordered_set<std::string>(words.begin(), words.end()));
    Tokenizer tokenizer(std::move(stop), doc.at("min_token_length").get<std::size_t>());
    auto model = TfidfModel::from_parts(doc.at("terms").get<std::vector<std::string>>(),
                                        doc.at("idf").get<std::vector<double>>(),
                                        doc.at("document_count").get<std::size_t>(),
                                        doc.at("token_config").get<std::string>());
    return TfidfEmbedder(std::move(tokenizer), std::move(model));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, "malformed TF-IDF model file: " + std::string(e.what()));
  }
}

EmbeddingVector VectorTableEmbedder::embed(const BugReport& report) const {
  const auto it = table_.find(report.id);
  if (it == table_.end()) {
    throw Error(ErrorKind::kProvider, "no vector for issue " + std::to_string(report.id));
  }
  return it->second;
}

EmbeddingVector EndpointEmbedder::embed(const BugReport& report) const {
  return endpoint_->fetch(document_text(report));
}

}  // namespace dupbug
