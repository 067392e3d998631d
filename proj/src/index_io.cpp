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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "dupbug/error.hpp"
#include "dupbug/index.hpp"

namespace dupbug {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'I', 'X'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2,
                                                                       std::uint16_t, std::uint8_t>>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
  }
  void raw(const char* data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2,
                                                                       std::uint16_t, std::uint8_t>>>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorKind::kFormat, "index file is truncated");
  }
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void SearchIndex::save(const std::filesystem::path& path) const {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(kind_));
  w.put<std::uint32_t>(dim_);
  w.put<std::uint64_t>(ids_.size());
  for (std::size_t row = 0; row < ids_.size(); ++row) {
    w.put<std::uint64_t>(ids_[row]);
    w.put<std::int32_t>(dates_[row].days);
    if (kind_ == VectorKind::kDense) {
      for (float v : dense_row(row)) w.put<float>(v);
    } else {
      const auto idx = sparse_indices(row);
      const auto vals = sparse_values(row);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        w.put<std::uint32_t>(idx[i]);
        w.put<float>(vals[i]);
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

SearchIndex SearchIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  char magic[4];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::kFormat, path.string() + " is not a DSIX index file");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kFormat, "unsupported index format version " + std::to_string(version) +
                                        " (this build reads version " +
                                        std::to_string(kFormatVersion) + ")");
  }
  const auto kind = r.get<std::uint8_t>();
  if (kind > 1) throw Error(ErrorKind::kFormat, "unknown index kind byte " + std::to_string(kind));

  SearchIndex index;
  index.kind_ = static_cast<VectorKind>(kind);
  index.dim_ = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  // Each entry takes at least 12 bytes; reject counts the file cannot hold.
  if (count > r.remaining() / 12) throw Error(ErrorKind::kFormat, "index file is truncated");
  index.ids_.reserve(count);
  index.dates_.reserve(count);

  for (std::uint64_t e = 0; e < count; ++e) {
    const auto id = r.get<std::uint64_t>();
    const Date created{r.get<std::int32_t>()};
    if (index.rows_.contains(id)) {
      throw Error(ErrorKind::kFormat, "duplicate id " + std::to_string(id) + " in index file");
    }
    index.rows_.emplace(id, index.ids_.size());
    index.ids_.push_back(id);
    index.dates_.push_back(created);
    if (index.kind_ == VectorKind::kDense) {
      for (std::uint32_t d = 0; d < index.dim_; ++d) index.values_.push_back(r.get<float>());
      continue;
    }
    const auto nnz = r.get<std::uint32_t>();
    if (nnz > index.dim_ || nnz > r.remaining() / 8) {
      throw Error(ErrorKind::kFormat, "index file is truncated");
    }
    for (std::uint32_t i = 0; i < nnz; ++i) {
      const auto col = r.get<std::uint32_t>();
      const auto val = r.get<float>();
      if (col >= index.dim_ || (i > 0 && col <= index.indices_.back())) {
        throw Error(ErrorKind::kFormat, "sparse row of id " + std::to_string(id) +
                                            " has unordered or out-of-range indices");
      }
      index.indices_.push_back(col);
      index.values_.push_back(val);
    }
    index.offsets_.push_back(index.indices_.size());
  }
  if (r.remaining() != 0) throw Error(ErrorKind::kFormat, "trailing bytes after index entries");
  if (index.ids_.empty()) throw Error(ErrorKind::kFormat, "index file holds no entries");
  return index;
}

}  // namespace dupbug
