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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <semaphore>
#include <string>
#include <string_view>

#include "dupbug/corpus.hpp"
#include "dupbug/vector.hpp"

namespace dupbug {

using VectorTable = std::map<IssueId, EmbeddingVector>;

/// Reads `{"id": <int>, "vector": [<float>...]}` lines. Every vector is
/// L2-normalized on load. Mismatched dimensions, repeated ids, non-finite
/// components and unparsable lines are fatal (ErrorKind::kInput).
VectorTable load_vector_file(std::istream& in);
VectorTable load_vector_file(const std::filesystem::path& path);

/// Writes dense vectors in the same line format, ascending by id.
void write_vector_file(const VectorTable& table, std::ostream& out);
void write_vector_file(const VectorTable& table, const std::filesystem::path& path);

struct EndpointSettings {
  std::string url;  // http(s)://host[:port][/path]
  std::string model;
  std::chrono::milliseconds timeout{30'000};
  int retries = 3;  // extra attempts after the first
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds backoff_cap{10'000};
  std::ptrdiff_t max_in_flight = 4;
  std::string bearer_token;  // sent as Authorization header when non-empty
};

/// Client for a remote embedding service.
///
/// Request:  POST {"input": "<text>", "model": "<label>"}
/// Response: {"embedding": [<float>...]}
///
/// Connection failures, 408, 429 and 5xx responses are retried with
/// exponential backoff (base * 2^attempt, capped). Other non-2xx responses
/// fail immediately. Thread-safe; concurrent calls are capped at
/// `max_in_flight`. The first successful response fixes the session
/// dimensionality.
class EmbeddingEndpoint {
 public:
  explicit EmbeddingEndpoint(EndpointSettings settings);

  /// Throws ErrorKind::kProvider once retries are exhausted and
  /// ErrorKind::kInput when the response dimension disagrees with the session.
  EmbeddingVector fetch(std::string_view text);

  /// 0 until the first successful response.
  std::uint32_t dim() const { return dim_.load(); }
  const EndpointSettings& settings() const { return settings_; }

  std::chrono::milliseconds backoff_delay(int attempt) const;

 private:
  EndpointSettings settings_;
  std::string origin_;  // scheme://host:port
  std::string path_;
  std::atomic<std::uint32_t> dim_{0};
  std::counting_semaphore<1024> in_flight_;
};

inline EmbeddingVector fetch_vector(EmbeddingEndpoint& endpoint, std::string_view text) {
  return endpoint.fetch(text);
}

}  // namespace dupbug
