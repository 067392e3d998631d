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
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dupbug/date.hpp"

namespace dupbug {

using IssueId = std::uint64_t;

struct BugReport {
  IssueId id = 0;
  std::string summary;
  std::string description;
  Date created_at;
  std::optional<Date> resolved_at;
  std::optional<std::string> priority;
  std::optional<std::string> component;
  std::optional<std::string> status;
  std::optional<std::string> resolution;
  std::optional<std::string> version;
};

struct ReportParseResult {
  std::vector<BugReport> reports;  // input order, first occurrence of each id
  std::size_t skipped = 0;         // malformed lines
  std::size_t duplicate_ids = 0;   // well-formed lines dropped because the id was seen
};

/// Reads newline-delimited JSON report records. Malformed records are
/// counted and skipped; an unreadable source throws ErrorKind::kIo.
ReportParseResult parse_reports(std::istream& in);
ReportParseResult parse_reports(const std::filesystem::path& path);

/// `child_id` was reported as a duplicate of `parent_id`.
struct DuplicatePair {
  IssueId child_id = 0;
  IssueId parent_id = 0;

  friend bool operator==(const DuplicatePair&, const DuplicatePair&) = default;
};

struct PairParseResult {
  std::vector<DuplicatePair> pairs;
  std::size_t skipped = 0;     // rows that do not parse
  std::size_t self_pairs = 0;  // rows with issue_id == duplicate_id
};

/// Reads the `issue_id,duplicate_id` CSV (header required, columns located by
/// name). `duplicate_id` is the child unless `swap_columns` is set.
PairParseResult parse_pairs(std::istream& in, bool swap_columns = false);
PairParseResult parse_pairs(const std::filesystem::path& path, bool swap_columns = false);

enum class InsertOutcome {
  kUnchanged,  // pair already reflected in the map
  kAdded,      // child attached under the parent's canonical root
  kDemoted,    // two roots merged and a previously canonical parent became a duplicate
};

/// Duplicate-to-original map. Every key is a duplicate; every value is the
/// canonical (lowest-id) report of its duplicate cluster. Keys and values
/// are disjoint and chains never exceed depth one.
class DupOrgMap {
 public:
  DupOrgMap() = default;

  /// Throws ErrorKind::kValidation for a self pair.
  InsertOutcome insert(const DuplicatePair& pair);

  /// Canonical root of `id` (the id itself when it is not a duplicate).
  IssueId resolve(IssueId id) const;

  bool contains(IssueId child) const { return entries_.contains(child); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// child -> canonical parent, ascending by child.
  const std::map<IssueId, IssueId>& entries() const { return entries_; }

  /// Children currently mapped to `root`, ascending.
  std::vector<IssueId> children_of(IssueId root) const;

  /// True when keys and values are disjoint, no key maps to itself and every
  /// value is a root.
  bool satisfies_invariants() const;

  friend bool operator==(const DupOrgMap& a, const DupOrgMap& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::map<IssueId, IssueId> entries_;
  std::unordered_map<IssueId, std::set<IssueId>> children_;
};

struct MapBuildStats {
  std::size_t pairs = 0;
  std::size_t added = 0;
  std::size_t unchanged = 0;
  std::size_t demotions = 0;
  std::size_t rejected = 0;  // self pairs
};

/// Folds DupOrgMap::insert over `pairs` in order. Rejected pairs are skipped
/// and counted.
DupOrgMap build_intermediate_map(const std::vector<DuplicatePair>& pairs,
                                 MapBuildStats* stats = nullptr);

/// Folds the entries of `second` (ascending child id) into a copy of `first`.
DupOrgMap merge_maps(const DupOrgMap& first, const DupOrgMap& second,
                     MapBuildStats* stats = nullptr);

/// `child_id,canonical_parent_id` CSV, header first, rows ascending by child.
void write_map_csv(const DupOrgMap& map, std::ostream& out);
void write_map_csv(const DupOrgMap& map, const std::filesystem::path& path);
DupOrgMap read_map_csv(std::istream& in);
DupOrgMap read_map_csv(const std::filesystem::path& path);

struct CorpusSplit {
  std::set<IssueId> train_ids;         // parents and uniques
  std::set<IssueId> test_ids;          // duplicates whose canonical parent is in the corpus
  std::set<IssueId> unresolvable_ids;  // duplicates in the corpus whose parent is not
  std::set<IssueId> absent_keys;       // map keys that are not in the corpus at all
};

CorpusSplit split_corpus(const std::vector<BugReport>& reports, const DupOrgMap& map);

/// One id per line, ascending.
void write_id_list(const std::set<IssueId>& ids, const std::filesystem::path& path);
std::set<IssueId> read_id_list(const std::filesystem::path& path);

/// Lookup table over a report list.
std::unordered_map<IssueId, const BugReport*> index_by_id(const std::vector<BugReport>& reports);

}  // namespace dupbug
