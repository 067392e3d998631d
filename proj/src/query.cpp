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

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dupbug/error.hpp"
#include "dupbug/index.hpp"

namespace dupbug {

namespace {

struct Candidate {
  double score;
  IssueId id;
};

bool better(const Candidate& a, const Candidate& b) {
  return ranks_before(a.score, a.id, b.score, b.id);
}

// Probe laid out for row scoring: dense probes are used as is, sparse probes
// are scattered into a dim-length array so each row costs O(row nnz).
class ProbeView {
 public:
  ProbeView(const SearchIndex& index, const EmbeddingVector& prepared) : index_(index) {
    if (index.kind() == VectorKind::kDense) {
      values_.assign(prepared.values().begin(), prepared.values().end());
      return;
    }
    values_.assign(index.dim(), 0.0);
    const auto idx = prepared.indices();
    const auto vals = prepared.values();
    for (std::size_t i = 0; i < idx.size(); ++i) values_[idx[i]] = vals[i];
  }

  double score(std::size_t row) const {
    double sum = 0.0;
    if (index_.kind() == VectorKind::kDense) {
      const auto r = index_.dense_row(row);
      for (std::size_t d = 0; d < r.size(); ++d) sum += static_cast<double>(r[d]) * values_[d];
    } else {
      const auto idx = index_.sparse_indices(row);
      const auto vals = index_.sparse_values(row);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        sum += static_cast<double>(vals[i]) * values_[idx[i]];
      }
    }
    return std::clamp(sum, -1.0, 1.0);
  }

 private:
  const SearchIndex& index_;
  std::vector<double> values_;
};

void keep_top(std::vector<Candidate>& cands, std::size_t n) {
  if (cands.size() > n) {
    std::nth_element(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n), cands.end(),
                     better);
    cands.resize(n);
  }
}

QueryResult finish(std::vector<Candidate>& cands, std::size_t n) {
  keep_top(cands, n);
  std::sort(cands.begin(), cands.end(), better);
  QueryResult result;
  result.reserve(cands.size());
  for (const auto& c : cands) result.push_back({c.id, c.score});
  return result;
}

void scan_rows(const SearchIndex& index, const ProbeView& probe,
               const std::optional<DateWindow>& window, std::size_t begin, std::size_t end,
               std::vector<Candidate>& out) {
  const auto ids = index.ids();
  const auto dates = index.created_dates();
  for (std::size_t row = begin; row < end; ++row) {
    if (window && !window->admits(dates[row])) continue;
    out.push_back({probe.score(row), ids[row]});
  }
}

int thread_count(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

void require_positive(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kValidation, "result count n must be positive");
}

QueryResult query_serial(const SearchIndex& index, const EmbeddingVector& prepared,
                         std::size_t n, const std::optional<DateWindow>& window) {
  const ProbeView view(index, prepared);
  std::vector<Candidate> cands;
  cands.reserve(window ? 0 : index.size());
  scan_rows(index, view, window, 0, index.size(), cands);
  return finish(cands, n);
}

}  // namespace

QueryResult query(const SearchIndex& index, const EmbeddingVector& probe, std::size_t n,
                  const std::optional<DateWindow>& window, int workers) {
  require_positive(n);
  const EmbeddingVector prepared = prepare_probe(index, probe);
  const ProbeView view(index, prepared);
  const std::size_t rows = index.size();
  const int threads = thread_count(workers);

  std::vector<Candidate> merged;
#pragma omp parallel num_threads(threads)
  {
    int tid = 0;
    int nthreads = 1;
#ifdef _OPENMP
    tid = omp_get_thread_num();
    nthreads = omp_get_num_threads();
#endif
    const std::size_t chunk = (rows + static_cast<std::size_t>(nthreads) - 1) /
                              static_cast<std::size_t>(nthreads);
    const std::size_t begin = std::min(rows, chunk * static_cast<std::size_t>(tid));
    const std::size_t end = std::min(rows, begin + chunk);

    std::vector<Candidate> local;
    local.reserve(end - begin);
    scan_rows(index, view, window, begin, end, local);
    keep_top(local, n);
#pragma omp critical(dupbug_query_merge)
    merged.insert(merged.end(), local.begin(), local.end());
  }
  return finish(merged, n);
}

std::vector<QueryResult> query_batch(const SearchIndex& index,
                                     std::span<const EmbeddingVector> probes, std::size_t n,
                                     std::span<const std::optional<DateWindow>> windows,
                                     int workers) {
  require_positive(n);
  if (!windows.empty() && windows.size() != probes.size()) {
    throw Error(ErrorKind::kValidation, "query_batch needs one window per probe");
  }
  std::vector<EmbeddingVector> prepared;
  prepared.reserve(probes.size());
  for (const auto& p : probes) prepared.push_back(prepare_probe(index, p));

  std::vector<QueryResult> results(probes.size());
  const auto count = static_cast<std::int64_t>(probes.size());
  const std::optional<DateWindow> no_window;
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count(workers))
  for (std::int64_t q = 0; q < count; ++q) {
    const auto i = static_cast<std::size_t>(q);
    results[i] = query_serial(index, prepared[i], n, windows.empty() ? no_window : windows[i]);
  }
  return results;
}

QueryResult query_reference(const SearchIndex& index, const EmbeddingVector& probe,
                            std::size_t n, const std::optional<DateWindow>& window) {
  require_positive(n);
  const EmbeddingVector prepared = prepare_probe(index, probe);
  std::vector<Candidate> all;
  for (std::size_t row = 0; row < index.size(); ++row) {
    if (window && !window->admits(index.created_dates()[row])) continue;
    const double s = prepared.is_zero() ? 0.0 : dot(prepared, index.vector(row));
    all.push_back({std::clamp(s, -1.0, 1.0), index.ids()[row]});
  }
  std::sort(all.begin(), all.end(), better);
  if (all.size() > n) all.resize(n);
  QueryResult result;
  for (const auto& c : all) result.push_back({c.id, c.score});
  return result;
}

}  // namespace dupbug
