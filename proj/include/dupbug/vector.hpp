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
#include <span>
#include <vector>

namespace dupbug {

enum class VectorKind : std::uint8_t { kSparse = 0, kDense = 1 };

/// Sparse (sorted index/weight pairs) or dense document representation.
/// The Euclidean norm is computed at construction and kept in sync.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  /// Throws ErrorKind::kValidation unless indices are strictly increasing and
  /// below `dim`, sizes match and every value is finite.
  static EmbeddingVector sparse(std::uint32_t dim, std::vector<std::uint32_t> indices,
                                std::vector<double> values);
  /// Throws ErrorKind::kValidation on a non-finite component.
  static EmbeddingVector dense(std::vector<double> values);

  VectorKind kind() const { return kind_; }
  std::uint32_t dim() const { return dim_; }
  double norm() const { return norm_; }
  bool is_zero() const { return norm_ == 0.0; }

  /// Dense: empty span. Sparse: strictly increasing.
  std::span<const std::uint32_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }
  std::size_t nnz() const { return values_.size(); }

  /// Unit-length copy; a zero vector becomes an empty (sparse) or all-zero
  /// (dense) vector with norm 0.
  EmbeddingVector normalized() const;

  double recompute_norm() const;

 private:
  VectorKind kind_ = VectorKind::kSparse;
  std::uint32_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
  double norm_ = 0.0;
};

/// Throws ErrorKind::kValidation when kind or dim differ.
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// 0 when either side is the zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace dupbug
