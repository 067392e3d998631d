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

#include "dupbug/vector_source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

using json = nlohmann::json;

std::vector<double> parse_components(const json& array, std::string_view what) {
  if (!array.is_array()) throw Error(ErrorKind::kInput, std::string(what) + " is not an array");
  std::vector<double> values;
  values.reserve(array.size());
  for (const auto& x : array) {
    if (!x.is_number()) {
      throw Error(ErrorKind::kInput, std::string(what) + " holds a non-numeric component");
    }
    const double v = x.get<double>();
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kInput, std::string(what) + " holds a non-finite component");
    }
    values.push_back(v);
  }
  return values;
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

VectorTable load_vector_file(std::istream& in) {
  VectorTable table;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "vector file line " + std::to_string(line_no);
    const json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object() || !row.contains("id") ||
        !row.contains("vector") || !row["id"].is_number_integer()) {
      throw Error(ErrorKind::kInput, where + " is not an {id, vector} record");
    }
    const auto id = row["id"].get<std::int64_t>();
    if (id <= 0) throw Error(ErrorKind::kInput, where + " has a non-positive id");
    auto values = parse_components(row["vector"], where);
    if (!dim) {
      dim = values.size();
    } else if (*dim != values.size()) {
      throw Error(ErrorKind::kInput, where + ": dimension " + std::to_string(values.size()) +
                                         " differs from " + std::to_string(*dim));
    }
    auto vec = EmbeddingVector::dense(std::move(values)).normalized();
    if (!table.emplace(static_cast<IssueId>(id), std::move(vec)).second) {
      throw Error(ErrorKind::kInput, where + ": duplicate id " + std::to_string(id));
    }
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read error in vector file");
  return table;
}

VectorTable load_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return load_vector_file(in);
}

void write_vector_file(const VectorTable& table, std::ostream& out) {
  for (const auto& [id, vec] : table) {
    if (vec.kind() != VectorKind::kDense) {
      throw Error(ErrorKind::kValidation, "vector files hold dense vectors only");
    }
    json row;
    row["id"] = id;
    row["vector"] = std::vector<double>(vec.values().begin(), vec.values().end());
    out << row.dump() << '\n';
  }
}

void write_vector_file(const VectorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_vector_file(table, out);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

EmbeddingEndpoint::EmbeddingEndpoint(EndpointSettings settings)
    : settings_(std::move(settings)),
      in_flight_(std::clamp<std::ptrdiff_t>(settings_.max_in_flight, 1, 1024)) {
  const auto scheme_end = settings_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::kConfig, "endpoint URL needs a scheme: " + settings_.url);
  }
  const auto path_start = settings_.url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = settings_.url;
    path_ = "/";
  } else {
    origin_ = settings_.url.substr(0, path_start);
    path_ = settings_.url.substr(path_start);
  }
  if (settings_.retries < 0) throw Error(ErrorKind::kConfig, "retries must be >= 0");
}

std::chrono::milliseconds EmbeddingEndpoint::backoff_delay(int attempt) const {
  auto delay = settings_.backoff_base;
  for (int i = 0; i < attempt && delay < settings_.backoff_cap; ++i) delay *= 2;
  return std::min(delay, settings_.backoff_cap);
}

EmbeddingVector EmbeddingEndpoint::fetch(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::kValidation, "cannot embed empty text");

  const json request = {{"input", std::string(text)}, {"model", settings_.model}};
  const std::string body = request.dump();

  std::string last_failure;
  for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(attempt - 1));

    httplib::Result res;
    {
      InFlightSlot slot(in_flight_);
      httplib::Client client(origin_);
      const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!settings_.bearer_token.empty()) {
        headers.emplace("Authorization", "Bearer " + settings_.bearer_token);
      }
      res = client.Post(path_, headers, body, "application/json");
    }

    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_failure = "HTTP status " + std::to_string(res->status);
      if (transient_status(res->status)) continue;
      break;
    }

    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("embedding")) {
      throw Error(ErrorKind::kProvider, "endpoint response lacks an embedding array");
    }
    std::vector<double> values;
    try {
      values = parse_components(reply["embedding"], "endpoint embedding");
    } catch (const Error& e) {
      throw Error(ErrorKind::kProvider, e.what());
    }
    if (values.empty()) throw Error(ErrorKind::kProvider, "endpoint returned an empty embedding");

    const auto got = static_cast<std::uint32_t>(values.size());
    std::uint32_t expected = 0;
    if (!dim_.compare_exchange_strong(expected, got) && expected != got) {
      throw Error(ErrorKind::kInput, "endpoint dimension changed from " +
                                         std::to_string(expected) + " to " + std::to_string(got));
    }
    return EmbeddingVector::dense(std::move(values)).normalized();
  }
  throw Error(ErrorKind::kProvider, "embedding endpoint failed after " +
                                        std::to_string(settings_.retries + 1) +
                                        " attempt(s): " + last_failure);
}

}  // namespace dupbug
