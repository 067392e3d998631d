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

// Serial reference scan against the OpenMP single-probe and batch kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>

#include "dupbug/index.hpp"

namespace {

using dupbug::EmbeddingVector;

std::vector<double> unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = gauss(rng);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

// Sparse rows look like TF-IDF documents: ~60 non-zeros over a 20k vocabulary.
EmbeddingVector sparse_doc(std::mt19937_64& rng, std::uint32_t dim) {
  std::uniform_int_distribution<std::uint32_t> col(0, dim - 1);
  std::vector<double> dense(dim, 0.0);
  for (int i = 0; i < 60; ++i) dense[col(rng)] += 1.0;
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  for (std::uint32_t d = 0; d < dim; ++d) {
    if (dense[d] != 0.0) {
      idx.push_back(d);
      val.push_back(dense[d]);
    }
  }
  return EmbeddingVector::sparse(dim, std::move(idx), std::move(val)).normalized();
}

struct Fixture {
  dupbug::SearchIndex index;
  std::vector<EmbeddingVector> probes;
};

const Fixture& fixture(bool sparse, std::size_t entries) {
  static std::map<std::pair<bool, std::size_t>, Fixture> cache;
  auto it = cache.find({sparse, entries});
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(42);
  constexpr std::uint32_t kDenseDim = 384, kSparseDim = 20000;
  auto make = [&] {
    return sparse ? sparse_doc(rng, kSparseDim) : EmbeddingVector::dense(unit(rng, kDenseDim));
  };
  std::vector<dupbug::IndexItem> items;
  for (std::size_t i = 0; i < entries; ++i) {
    items.push_back({static_cast<dupbug::IssueId>(i + 1), make(), dupbug::Date{0}});
  }
  Fixture f{dupbug::build_index(std::move(items)), {}};
  for (int q = 0; q < 64; ++q) f.probes.push_back(make());
  return cache.emplace(std::make_pair(sparse, entries), std::move(f)).first->second;
}

void BM_QueryReference(benchmark::State& state) {
  const auto& f = fixture(state.range(0) != 0, static_cast<std::size_t>(state.range(1)));
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dupbug::query_reference(f.index, f.probes[q++ % f.probes.size()], 500));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_QueryParallel(benchmark::State& state) {
  const auto& f = fixture(state.range(0) != 0, static_cast<std::size_t>(state.range(1)));
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dupbug::query(f.index, f.probes[q++ % f.probes.size()], 500));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_QueryBatch(benchmark::State& state) {
  const auto& f = fixture(state.range(0) != 0, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(dupbug::query_batch(f.index, f.probes, 500));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.probes.size()));
}

// Args: {sparse, entries}
#define DUPBUG_BENCH_ARGS ->Args({0, 10'000})->Args({0, 50'000})->Args({1, 50'000})->Unit(benchmark::kMillisecond)

BENCHMARK(BM_QueryReference) DUPBUG_BENCH_ARGS;
BENCHMARK(BM_QueryParallel) DUPBUG_BENCH_ARGS;
BENCHMARK(BM_QueryBatch) DUPBUG_BENCH_ARGS;

}  // namespace

BENCHMARK_MAIN();
