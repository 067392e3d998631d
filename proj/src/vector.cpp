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

#include "dupbug/vector.hpp"

#include <cmath>
#include <string>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

double l2(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kValidation, "non-finite vector component");
  }
}

}  // namespace

EmbeddingVector EmbeddingVector::sparse(std::uint32_t dim, std::vector<std::uint32_t> indices,
                                        std::vector<double> values) {
  if (indices.size() != values.size()) {
    throw Error(ErrorKind::kValidation, "sparse vector index/value length mismatch");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim || (i > 0 && indices[i] <= indices[i - 1])) {
      throw Error(ErrorKind::kValidation,
                  "sparse indices must be strictly increasing and below dim " +
                      std::to_string(dim));
    }
  }
  require_finite(values);
  EmbeddingVector v;
  v.kind_ = VectorKind::kSparse;
  v.dim_ = dim;
  v.indices_ = std::move(indices);
  v.values_ = std::move(values);
  v.norm_ = l2(v.values_);
  return v;
}

EmbeddingVector EmbeddingVector::dense(std::vector<double> values) {
  require_finite(values);
  EmbeddingVector v;
  v.kind_ = VectorKind::kDense;
  v.dim_ = static_cast<std::uint32_t>(values.size());
  v.values_ = std::move(values);
  v.norm_ = l2(v.values_);
  return v;
}

EmbeddingVector EmbeddingVector::normalized() const {
  EmbeddingVector out = *this;
  if (norm_ == 0.0) {
    if (kind_ == VectorKind::kSparse) {
      out.indices_.clear();
      out.values_.clear();
    }
    return out;
  }
  for (double& v : out.values_) v /= norm_;
  out.norm_ = l2(out.values_);
  return out;
}

double EmbeddingVector::recompute_norm() const { return l2(values_); }

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.kind() != b.kind() || a.dim() != b.dim()) {
    throw Error(ErrorKind::kValidation, "dot product of vectors with different kind or dim");
  }
  const auto av = a.values();
  const auto bv = b.values();
  double sum = 0.0;
  if (a.kind() == VectorKind::kDense) {
    for (std::size_t i = 0; i < av.size(); ++i) sum += av[i] * bv[i];
    return sum;
  }
  const auto ai = a.indices();
  const auto bi = b.indices();
  std::size_t i = 0, j = 0;
  while (i < ai.size() && j < bi.size()) {
    if (ai[i] < bi[j]) {
      ++i;
    } else if (ai[i] > bi[j]) {
      ++j;
    } else {
      sum += av[i++] * bv[j++];
    }
  }
  return sum;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.is_zero() || b.is_zero()) {
    if (a.kind() != b.kind() || a.dim() != b.dim()) {
      throw Error(ErrorKind::kValidation, "cosine of vectors with different kind or dim");
    }
    return 0.0;
  }
  return dot(a, b) / (a.norm() * b.norm());
}

}  // namespace dupbug
