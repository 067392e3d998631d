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

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "dupbug/embedder.hpp"
#include "dupbug/error.hpp"
#include "dupbug/vector_source.hpp"
#include "testing.hpp"

namespace dupbug {
namespace {

TEST(LoadVectorFile, NormalizesRows) {
  std::istringstream in(R"({"id": 7, "vector": [3, 4]}
{"id": 2, "vector": [0, 0]}

{"id": 9, "vector": [1e-3, 0]}
)");
  const auto table = load_vector_file(in);
  ASSERT_EQ(table.size(), 3u);
  const auto& v = table.at(7);
  EXPECT_EQ(v.kind(), VectorKind::kDense);
  EXPECT_NEAR(v.values()[0], 0.6, 1e-12);
  EXPECT_NEAR(v.values()[1], 0.8, 1e-12);
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EXPECT_TRUE(table.at(2).is_zero());
  EXPECT_NEAR(table.at(9).values()[0], 1.0, 1e-12);
}

TEST(LoadVectorFile, EmptyInputGivesEmptyTable) {
  std::istringstream in("");
  EXPECT_TRUE(load_vector_file(in).empty());
}

TEST(LoadVectorFile, RejectsBadRows) {
  const char* bad[] = {
      R"({"id": 1, "vector": [1, 0]}
{"id": 2, "vector": [1, 0, 0]})",
      R"({"id": 1, "vector": [1, 0]}
{"id": 1, "vector": [0, 1]})",
      R"({"id": 1, "vector": [1, "x"]})",
      R"({"id": 0, "vector": [1]})",
      R"({"vector": [1]})",
      R"(not json)",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    DUPBUG_EXPECT_ERROR(load_vector_file(in), ErrorKind::kInput);
  }
}

TEST(VectorFile, WriteReadRoundTrip) {
  VectorTable table;
  table.emplace(3, EmbeddingVector::dense({0.6, 0.8}));
  table.emplace(1, EmbeddingVector::dense({1.0, 0.0}));
  std::stringstream io;
  write_vector_file(table, io);
  const auto back = load_vector_file(io);
  ASSERT_EQ(back.size(), 2u);
  for (const auto& [id, vec] : table) {
    const auto& got = back.at(id);
    ASSERT_EQ(got.dim(), vec.dim());
    for (std::size_t i = 0; i < vec.nnz(); ++i) EXPECT_EQ(got.values()[i], vec.values()[i]);
  }
}

TEST(VectorTableEmbedder, MissingIdIsProviderError) {
  VectorTable table;
  table.emplace(1, EmbeddingVector::dense({1.0}));
  const VectorTableEmbedder embedder(std::move(table), "file");
  EXPECT_EQ(embedder.embed(BugReport{.id = 1}).dim(), 1u);
  DUPBUG_EXPECT_ERROR(embedder.embed(BugReport{.id = 2}), ErrorKind::kProvider);
}

/// Local HTTP server that answers with a scripted sequence of responses.
class StubServer {
 public:
  using Handler = std::function<void(int call, const nlohmann::json& body, httplib::Response&)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const int call = calls_.fetch_add(1);
      last_auth_ = req.get_header_value("Authorization");
      handler_(call, nlohmann::json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EndpointSettings settings() const {
    EndpointSettings s;
    s.url = "http://127.0.0.1:" + std::to_string(port_) + "/embed";
    s.model = "stub-model";
    s.timeout = std::chrono::milliseconds(2000);
    s.backoff_base = std::chrono::milliseconds(1);
    s.backoff_cap = std::chrono::milliseconds(4);
    return s;
  }
  int calls() const { return calls_.load(); }
  std::string last_auth() const { return last_auth_; }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::string last_auth_;
};

void reply_vector(httplib::Response& res, const std::vector<double>& v) {
  res.set_content(nlohmann::json{{"embedding", v}}.dump(), "application/json");
}

TEST(EmbeddingEndpoint, ReturnsNormalizedVector) {
  StubServer server([](int, const nlohmann::json& body, httplib::Response& res) {
    EXPECT_EQ(body.at("model"), "stub-model");
    EXPECT_EQ(body.at("input"), "crash in parser");
    reply_vector(res, {3, 4});
  });
  auto settings = server.settings();
  settings.bearer_token = "secret";
  EmbeddingEndpoint endpoint(settings);
  const auto v = fetch_vector(endpoint, "crash in parser");
  ASSERT_EQ(v.dim(), 2u);
  EXPECT_NEAR(v.values()[0], 0.6, 1e-12);
  EXPECT_NEAR(v.values()[1], 0.8, 1e-12);
  EXPECT_EQ(endpoint.dim(), 2u);
  EXPECT_EQ(server.last_auth(), "Bearer secret");
}

TEST(EmbeddingEndpoint, RetriesThenFails) {
  StubServer server([](int, const nlohmann::json&, httplib::Response& res) { res.status = 500; });
  auto settings = server.settings();
  settings.retries = 2;
  EmbeddingEndpoint endpoint(settings);
  DUPBUG_EXPECT_ERROR(endpoint.fetch("text"), ErrorKind::kProvider);
  EXPECT_EQ(server.calls(), 3);
}

TEST(EmbeddingEndpoint, RecoversAfterTransientFailure) {
  StubServer server([](int call, const nlohmann::json&, httplib::Response& res) {
    if (call < 2) {
      res.status = call == 0 ? 429 : 503;
      return;
    }
    reply_vector(res, {1, 0, 0});
  });
  EmbeddingEndpoint endpoint(server.settings());
  EXPECT_EQ(endpoint.fetch("text").dim(), 3u);
  EXPECT_EQ(server.calls(), 3);
}

TEST(EmbeddingEndpoint, ClientErrorIsNotRetried) {
  StubServer server([](int, const nlohmann::json&, httplib::Response& res) { res.status = 400; });
  EmbeddingEndpoint endpoint(server.settings());
  DUPBUG_EXPECT_ERROR(endpoint.fetch("text"), ErrorKind::kProvider);
  EXPECT_EQ(server.calls(), 1);
}

TEST(EmbeddingEndpoint, DimensionChangeIsFatal) {
  StubServer server([](int call, const nlohmann::json&, httplib::Response& res) {
    reply_vector(res, call == 0 ? std::vector<double>{1, 0} : std::vector<double>{1, 0, 0});
  });
  EmbeddingEndpoint endpoint(server.settings());
  EXPECT_EQ(endpoint.fetch("first").dim(), 2u);
  DUPBUG_EXPECT_ERROR(endpoint.fetch("second"), ErrorKind::kInput);
}

TEST(EmbeddingEndpoint, UnreachableHostIsProviderError) {
  EndpointSettings settings;
  settings.url = "http://127.0.0.1:1/embed";
  settings.retries = 1;
  settings.backoff_base = std::chrono::milliseconds(1);
  settings.timeout = std::chrono::milliseconds(500);
  EmbeddingEndpoint endpoint(settings);
  DUPBUG_EXPECT_ERROR(endpoint.fetch("text"), ErrorKind::kProvider);
}

TEST(EmbeddingEndpoint, BackoffDoublesUpToCap) {
  EndpointSettings settings;
  settings.url = "http://localhost/";
  settings.backoff_base = std::chrono::milliseconds(100);
  settings.backoff_cap = std::chrono::milliseconds(700);
  const EmbeddingEndpoint endpoint(settings);
  EXPECT_EQ(endpoint.backoff_delay(0).count(), 100);
  EXPECT_EQ(endpoint.backoff_delay(1).count(), 200);
  EXPECT_EQ(endpoint.backoff_delay(2).count(), 400);
  EXPECT_EQ(endpoint.backoff_delay(3).count(), 700);
  EXPECT_EQ(endpoint.backoff_delay(30).count(), 700);
}

TEST(EmbeddingEndpoint, RejectsUrlWithoutScheme) {
  EndpointSettings settings;
  settings.url = "localhost:8080/embed";
  DUPBUG_EXPECT_ERROR(EmbeddingEndpoint{settings}, ErrorKind::kConfig);
}

TEST(EmbeddingEndpoint, ParallelFetchesAgreeOnDimension) {
  StubServer server([](int, const nlohmann::json& body, httplib::Response& res) {
    const auto text = body.at("input").get<std::string>();
    reply_vector(res, {static_cast<double>(text.size()), 1.0});
  });
  auto settings = server.settings();
  settings.max_in_flight = 2;
  EmbeddingEndpoint endpoint(settings);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      if (endpoint.fetch(std::string(t + 1, 'x')).dim() == 2u) ok.fetch_add(1);
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load(), 6);
  EXPECT_EQ(server.calls(), 6);
}

}  // namespace
}  // namespace dupbug
