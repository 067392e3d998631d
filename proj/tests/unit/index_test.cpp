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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "dupbug/error.hpp"
#include "dupbug/index.hpp"
#include "testing.hpp"

namespace dupbug {
namespace {

using testing::exhaustive_rank;
using testing::random_float_unit;

Date day(std::int32_t d) { return Date{d}; }

IndexItem dense_item(IssueId id, std::vector<double> v, std::int32_t created = 0) {
  return IndexItem{id, EmbeddingVector::dense(std::move(v)), day(created)};
}

std::vector<IssueId> ids_of(const QueryResult& r) {
  std::vector<IssueId> out;
  for (const auto& s : r) out.push_back(s.id);
  return out;
}

TEST(Query, Examples) {
  const auto index = build_index({dense_item(10, {1, 0}), dense_item(20, {0, 1})});
  const auto r = query(index, EmbeddingVector::dense({1, 0}), 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 10u);
  EXPECT_DOUBLE_EQ(r[0].score, 1.0);

  const auto tie = build_index({dense_item(10, {1, 0}), dense_item(5, {1, 0})});
  EXPECT_EQ(ids_of(query(tie, EmbeddingVector::dense({1, 0}), 2)), (std::vector<IssueId>{5, 10}));
}

TEST(Query, WindowExcludesOldAndFutureEntries) {
  const auto index = build_index({dense_item(10, {1, 0}, 0), dense_item(20, {1, 0}, 100),
                                  dense_item(30, {1, 0}, 200)});
  const auto window = DateWindow::make(day(150), 100);
  EXPECT_EQ(ids_of(query(index, EmbeddingVector::dense({1, 0}), 5, window)),
            (std::vector<IssueId>{20}));
  // Lookback bound is inclusive.
  EXPECT_EQ(ids_of(query(index, EmbeddingVector::dense({1, 0}), 5, DateWindow::make(day(200), 200))),
            (std::vector<IssueId>{10, 20, 30}));
  DUPBUG_EXPECT_ERROR(DateWindow::make(day(0), 0), ErrorKind::kValidation);
}

TEST(Query, ZeroProbeScoresZeroInIdOrder) {
  const auto index = build_index({dense_item(7, {1, 0}), dense_item(3, {0, 1}), dense_item(5, {1, 1})});
  const auto r = query(index, EmbeddingVector::dense({0, 0}), 10);
  EXPECT_EQ(ids_of(r), (std::vector<IssueId>{3, 5, 7}));
  for (const auto& s : r) EXPECT_EQ(s.score, 0.0);
}

TEST(Query, NLargerThanIndexReturnsEverything) {
  const auto index = build_index({dense_item(1, {1, 0}), dense_item(2, {0, 1})});
  EXPECT_EQ(query(index, EmbeddingVector::dense({1, 1}), 50).size(), 2u);
  DUPBUG_EXPECT_ERROR(query(index, EmbeddingVector::dense({1, 1}), 0), ErrorKind::kValidation);
}

TEST(Query, ProbeMustMatchIndexKindAndDim) {
  const auto index = build_index({dense_item(1, {1, 0})});
  EXPECT_THROW(query(index, EmbeddingVector::dense({1, 0, 0}), 1), Error);
  EXPECT_THROW(query(index, EmbeddingVector::sparse(2, {0}, {1.0}), 1), Error);
}

TEST(BuildIndex, RejectsDuplicatesAndMixedShapes) {
  DUPBUG_EXPECT_ERROR(build_index({dense_item(1, {1, 0}), dense_item(1, {0, 1})}),
                      ErrorKind::kValidation);
  DUPBUG_EXPECT_ERROR(build_index({dense_item(1, {1, 0}), dense_item(2, {0, 1, 0})}),
                      ErrorKind::kValidation);
  DUPBUG_EXPECT_ERROR(build_index({}), ErrorKind::kValidation);
}

TEST(BuildIndex, NormalizesStoredVectors) {
  const auto index = build_index({dense_item(1, {3, 4})});
  const auto row = index.dense_row(0);
  EXPECT_FLOAT_EQ(row[0], 0.6f);
  EXPECT_FLOAT_EQ(row[1], 0.8f);
}

struct RandomIndex {
  std::vector<IssueId> ids;
  std::vector<std::vector<double>> dense;
  std::vector<Date> dates;
  SearchIndex index;
};

// Entries may repeat another entry's vector so that score ties occur.
RandomIndex random_index(std::mt19937_64& rng, std::size_t count, std::uint32_t dim, bool sparse) {
  RandomIndex out;
  std::vector<IndexItem> items;
  std::set<IssueId> used;
  std::uniform_int_distribution<IssueId> id_dist(1, count * 20);
  std::uniform_int_distribution<std::int32_t> date_dist(0, 2000);
  std::uniform_int_distribution<std::uint32_t> nnz_dist(1, dim);
  std::bernoulli_distribution repeat(0.15);
  while (out.ids.size() < count) {
    const IssueId id = id_dist(rng);
    if (!used.insert(id).second) continue;
    std::vector<double> v(dim, 0.0);
    if (!out.dense.empty() && repeat(rng)) {
      v = out.dense[rng() % out.dense.size()];
    } else if (sparse) {
      std::vector<std::uint32_t> cols(dim);
      std::iota(cols.begin(), cols.end(), 0u);
      std::shuffle(cols.begin(), cols.end(), rng);
      const auto k = nnz_dist(rng);
      const auto unit = random_float_unit(rng, k);
      for (std::uint32_t i = 0; i < k; ++i) v[cols[i]] = unit[i];
    } else {
      v = random_float_unit(rng, dim);
    }
    out.ids.push_back(id);
    out.dense.push_back(v);
    out.dates.push_back(day(date_dist(rng)));
  }
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    items.push_back({out.ids[i], sparse ? [&] {
                       std::vector<std::uint32_t> idx;
                       std::vector<double> val;
                       for (std::uint32_t d = 0; d < dim; ++d) {
                         if (out.dense[i][d] != 0.0) {
                           idx.push_back(d);
                           val.push_back(out.dense[i][d]);
                         }
                       }
                       return EmbeddingVector::sparse(dim, idx, val);
                     }()
                                          : EmbeddingVector::dense(out.dense[i]),
                     out.dates[i]});
  }
  out.index = build_index(std::move(items));
  return out;
}

EmbeddingVector as_kind(const std::vector<double>& v, bool sparse) {
  if (!sparse) return EmbeddingVector::dense(v);
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  for (std::uint32_t d = 0; d < v.size(); ++d) {
    if (v[d] != 0.0) {
      idx.push_back(d);
      val.push_back(v[d]);
    }
  }
  return EmbeddingVector::sparse(static_cast<std::uint32_t>(v.size()), idx, val);
}

TEST(QueryProperty, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size_dist(1, 500);
  std::uniform_int_distribution<std::uint32_t> dim_dist(1, 32);
  std::uniform_int_distribution<std::size_t> n_dist(1, 60);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool sparse = coin(rng);
    const auto dim = dim_dist(rng);
    auto ri = random_index(rng, size_dist(rng), dim, sparse);
    // Probe is either an indexed vector (forces ties at the top) or fresh.
    const auto probe = coin(rng) ? ri.dense[rng() % ri.dense.size()] : random_float_unit(rng, dim);
    std::optional<DateWindow> window;
    if (coin(rng)) window = DateWindow::make(day(static_cast<std::int32_t>(rng() % 2200)), 1 + rng() % 900);
    const auto n = n_dist(rng);
    const auto expected = exhaustive_rank(ri.ids, ri.dense, ri.dates, probe, n, window);
    const auto got = query(ri.index, as_kind(probe, sparse), n, window);
    ASSERT_EQ(got, expected) << "trial " << trial;
    ASSERT_EQ(query_reference(ri.index, as_kind(probe, sparse), n, window), expected);
  }
}

TEST(QueryProperty, ParallelPathsAgreeWithReference) {
  std::mt19937_64 rng(7);
  for (const bool sparse : {false, true}) {
    auto ri = random_index(rng, 3000, 24, sparse);
    std::vector<EmbeddingVector> probes;
    std::vector<std::optional<DateWindow>> windows;
    for (int q = 0; q < 40; ++q) {
      probes.push_back(as_kind(random_float_unit(rng, 24), sparse));
      windows.push_back(q % 2 ? std::optional(DateWindow::make(day(1500), 700)) : std::nullopt);
    }
    for (const int workers : {1, 2, 3, 8}) {
      const auto batch = query_batch(ri.index, probes, 25, windows, workers);
      for (std::size_t q = 0; q < probes.size(); ++q) {
        const auto ref = query_reference(ri.index, probes[q], 25, windows[q]);
        ASSERT_EQ(query(ri.index, probes[q], 25, windows[q], workers), ref);
        ASSERT_EQ(batch[q], ref);
      }
    }
  }
}

TEST(QueryProperty, PrefixMonotonicity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto ri = random_index(rng, 200, 8, trial % 2 == 1);
    const auto probe = as_kind(random_float_unit(rng, 8), trial % 2 == 1);
    const auto big = query(ri.index, probe, 120);
    for (std::size_t n : {1, 5, 30, 119}) {
      const auto small = query(ri.index, probe, n);
      ASSERT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
    }
  }
}

TEST(QueryProperty, WindowSoundAndComplete) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto ri = random_index(rng, 300, 6, false);
    const auto window = DateWindow::make(day(1000 + trial), 50 + trial * 7);
    const auto r = query(ri.index, EmbeddingVector::dense(random_float_unit(rng, 6)), 300, window);
    std::size_t admitted = 0;
    for (const auto& d : ri.dates) admitted += window.admits(d) ? 1 : 0;
    ASSERT_EQ(r.size(), admitted);
    for (const auto& s : r) {
      const auto row = ri.index.row_of(s.id);
      ASSERT_TRUE(row);
      ASSERT_TRUE(window.admits(ri.index.created_dates()[*row]));
    }
  }
}

TEST(CosineProperty, SymmetricAndBounded) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(10), b(10);
    for (auto& x : a) x = val(rng);
    for (auto& x : b) x = val(rng);
    const auto va = EmbeddingVector::dense(a), vb = EmbeddingVector::dense(b);
    ASSERT_DOUBLE_EQ(cosine(va, vb), cosine(vb, va));
    ASSERT_LE(std::abs(cosine(va, vb)), 1.0 + 1e-12);
    ASSERT_NEAR(cosine(va, va), 1.0, 1e-12);
  }
}

TEST(IndexFile, RoundTripIsExact) {
  testing::TempDir dir;
  std::mt19937_64 rng(21);
  for (const bool sparse : {false, true}) {
    auto ri = random_index(rng, 400, 16, sparse);
    const auto path = dir / (sparse ? "sparse.dsix" : "dense.dsix");
    ri.index.save(path);
    const auto loaded = SearchIndex::load(path);
    ASSERT_EQ(loaded.size(), ri.index.size());
    ASSERT_EQ(loaded.kind(), ri.index.kind());
    ASSERT_EQ(loaded.dim(), ri.index.dim());
    ASSERT_TRUE(std::equal(loaded.ids().begin(), loaded.ids().end(), ri.index.ids().begin()));
    for (int q = 0; q < 20; ++q) {
      const auto probe = as_kind(random_float_unit(rng, 16), sparse);
      const auto a = query(ri.index, probe, 30);
      const auto b = query(loaded, probe, 30);
      ASSERT_EQ(ids_of(a), ids_of(b));
      for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i].score, b[i].score, 1e-12);
    }
  }
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

TEST(IndexFile, RejectsDamagedFiles) {
  testing::TempDir dir;
  const auto index = build_index({dense_item(1, {1, 0}), dense_item(2, {0, 1})});
  index.save(dir / "ok.dsix");
  const auto bytes = read_bytes(dir / "ok.dsix");
  ASSERT_EQ(bytes.substr(0, 4), "DSIX");

  write_bytes(dir / "truncated.dsix", bytes.substr(0, bytes.size() - 3));
  DUPBUG_EXPECT_ERROR(SearchIndex::load(dir / "truncated.dsix"), ErrorKind::kFormat);

  auto newer = bytes;
  newer[4] = static_cast<char>(SearchIndex::kFormatVersion + 1);
  write_bytes(dir / "newer.dsix", newer);
  DUPBUG_EXPECT_ERROR(SearchIndex::load(dir / "newer.dsix"), ErrorKind::kFormat);

  auto magic = bytes;
  magic[0] = 'X';
  write_bytes(dir / "magic.dsix", magic);
  DUPBUG_EXPECT_ERROR(SearchIndex::load(dir / "magic.dsix"), ErrorKind::kFormat);

  DUPBUG_EXPECT_ERROR(SearchIndex::load(dir / "missing.dsix"), ErrorKind::kIo);
}

}  // namespace
}  // namespace dupbug
