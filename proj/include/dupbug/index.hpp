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
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dupbug/corpus.hpp"
#include "dupbug/date.hpp"
#include "dupbug/vector.hpp"

namespace dupbug {

/// Candidates created in [query_date - lookback_days, query_date].
struct DateWindow {
  Date query_date;
  std::int32_t lookback_days = 0;

  /// Throws ErrorKind::kValidation unless lookback_days > 0.
  static DateWindow make(Date query_date, std::int64_t lookback_days);

  bool admits(Date created) const {
    return created <= query_date && query_date.days_since(created) <= lookback_days;
  }
};

struct ScoredId {
  IssueId id = 0;
  double score = 0.0;

  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Descending by score, ties by ascending id.
using QueryResult = std::vector<ScoredId>;

/// Strict ranking order used by every query path.
constexpr bool ranks_before(double score_a, IssueId id_a, double score_b, IssueId id_b) {
  return score_a > score_b || (score_a == score_b && id_a < id_b);
}

struct IndexItem {
  IssueId id = 0;
  EmbeddingVector vector;
  Date created_at;
};

/// Exact cosine search structure over unit vectors.
///
/// Vectors are normalized on build (when not already unit length within
/// 1e-6) and stored as float32, sparse rows in CSR layout, dense rows
/// row-major. Scores accumulate in double in ascending column order, so a
/// persisted index reproduces scores bit for bit. Immutable after build.
class SearchIndex {
 public:
  /// Throws ErrorKind::kValidation on an empty item list, repeated ids or
  /// mixed kind/dim.
  static SearchIndex build(std::vector<IndexItem> items);

  std::size_t size() const { return ids_.size(); }
  std::uint32_t dim() const { return dim_; }
  VectorKind kind() const { return kind_; }

  std::span<const IssueId> ids() const { return ids_; }
  std::span<const Date> created_dates() const { return dates_; }
  bool contains(IssueId id) const { return rows_.contains(id); }
  std::optional<std::size_t> row_of(IssueId id) const;

  /// Dense rows.
  std::span<const float> dense_row(std::size_t row) const {
    return {values_.data() + row * dim_, dim_};
  }
  /// Sparse rows.
  std::span<const std::uint32_t> sparse_indices(std::size_t row) const {
    return {indices_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const float> sparse_values(std::size_t row) const {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  /// Stored (float32-rounded) vector of a row.
  EmbeddingVector vector(std::size_t row) const;

  /// Binary layout: "DSIX", u16 version, u8 kind, u32 dim, u64 count, then per
  /// entry u64 id, i32 days since epoch and the payload (dense: dim f32;
  /// sparse: u32 nnz then nnz (u32 index, f32 value) pairs). Little-endian.
  void save(const std::filesystem::path& path) const;
  /// Throws ErrorKind::kFormat on bad magic, newer version or truncation.
  static SearchIndex load(const std::filesystem::path& path);

  static constexpr std::uint16_t kFormatVersion = 1;

 private:
  void add_row(IssueId id, Date created, const EmbeddingVector& unit);

  VectorKind kind_ = VectorKind::kDense;
  std::uint32_t dim_ = 0;
  std::vector<IssueId> ids_;
  std::vector<Date> dates_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<float> values_;
  std::unordered_map<IssueId, std::size_t> rows_;
};

inline SearchIndex build_index(std::vector<IndexItem> items) {
  return SearchIndex::build(std::move(items));
}

/// Probe converted to the index storage precision.
/// Throws ErrorKind::kValidation when kind or dim differ from the index.
EmbeddingVector prepare_probe(const SearchIndex& index, const EmbeddingVector& probe);

/// Top-min(n, |candidates|) entries by cosine. Scoring is split across
/// `workers` OpenMP threads (0 = runtime default). A zero probe scores 0
/// against everything.
QueryResult query(const SearchIndex& index, const EmbeddingVector& probe, std::size_t n,
                  const std::optional<DateWindow>& window = std::nullopt, int workers = 0);

/// One serial query per probe, probes spread across `workers` threads.
/// `windows` is empty or one entry per probe.
std::vector<QueryResult> query_batch(const SearchIndex& index,
                                     std::span<const EmbeddingVector> probes, std::size_t n,
                                     std::span<const std::optional<DateWindow>> windows = {},
                                     int workers = 0);

/// Single-threaded exhaustive version kept as the behavioral reference:
/// scores every candidate, sorts everything, truncates.
QueryResult query_reference(const SearchIndex& index, const EmbeddingVector& probe,
                            std::size_t n, const std::optional<DateWindow>& window = std::nullopt);

}  // namespace dupbug
