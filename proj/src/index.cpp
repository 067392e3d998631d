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

#include "dupbug/index.hpp"

#include <cmath>
#include <string>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

constexpr double kUnitTolerance = 1e-6;

EmbeddingVector to_unit(const EmbeddingVector& v) {
  if (v.is_zero() || std::abs(v.norm() - 1.0) <= kUnitTolerance) return v;
  return v.normalized();
}

}  // namespace

DateWindow DateWindow::make(Date query_date, std::int64_t lookback_days) {
  if (lookback_days <= 0 || lookback_days > INT32_MAX) {
    throw Error(ErrorKind::kValidation, "lookback days must be a positive integer");
  }
  return DateWindow{query_date, static_cast<std::int32_t>(lookback_days)};
}

SearchIndex SearchIndex::build(std::vector<IndexItem> items) {
  if (items.empty()) throw Error(ErrorKind::kValidation, "cannot build an index from zero items");
  SearchIndex index;
  index.kind_ = items.front().vector.kind();
  index.dim_ = items.front().vector.dim();
  index.ids_.reserve(items.size());
  index.dates_.reserve(items.size());
  for (const auto& item : items) {
    if (item.vector.kind() != index.kind_ || item.vector.dim() != index.dim_) {
      throw Error(ErrorKind::kValidation,
                  "index item " + std::to_string(item.id) + " has a different kind or dim");
    }
    if (index.rows_.contains(item.id)) {
      throw Error(ErrorKind::kValidation, "duplicate id " + std::to_string(item.id) + " in index");
    }
    index.add_row(item.id, item.created_at, to_unit(item.vector));
  }
  return index;
}

void SearchIndex::add_row(IssueId id, Date created, const EmbeddingVector& unit) {
  rows_.emplace(id, ids_.size());
  ids_.push_back(id);
  dates_.push_back(created);
  if (kind_ == VectorKind::kDense) {
    for (double v : unit.values()) values_.push_back(static_cast<float>(v));
    return;
  }
  const auto idx = unit.indices();
  const auto vals = unit.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    indices_.push_back(idx[i]);
    values_.push_back(static_cast<float>(vals[i]));
  }
  offsets_.push_back(indices_.size());
}

std::optional<std::size_t> SearchIndex::row_of(IssueId id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

EmbeddingVector SearchIndex::vector(std::size_t row) const {
  if (kind_ == VectorKind::kDense) {
    const auto r = dense_row(row);
    return EmbeddingVector::dense(std::vector<double>(r.begin(), r.end()));
  }
  const auto idx = sparse_indices(row);
  const auto vals = sparse_values(row);
  return EmbeddingVector::sparse(dim_, std::vector<std::uint32_t>(idx.begin(), idx.end()),
                                 std::vector<double>(vals.begin(), vals.end()));
}

EmbeddingVector prepare_probe(const SearchIndex& index, const EmbeddingVector& probe) {
  if (probe.kind() != index.kind() || probe.dim() != index.dim()) {
    throw Error(ErrorKind::kValidation,
                "probe has dim " + std::to_string(probe.dim()) + " but index has dim " +
                    std::to_string(index.dim()) +
                    (probe.kind() != index.kind() ? " (and a different kind)" : ""));
  }
  const EmbeddingVector unit = to_unit(probe);
  std::vector<double> rounded;
  rounded.reserve(unit.nnz());
  for (double v : unit.values()) rounded.push_back(static_cast<double>(static_cast<float>(v)));
  if (unit.kind() == VectorKind::kDense) return EmbeddingVector::dense(std::move(rounded));
  return EmbeddingVector::sparse(
      unit.dim(), std::vector<std::uint32_t>(unit.indices().begin(), unit.indices().end()),
      std::move(rounded));
}

}  // namespace dupbug
