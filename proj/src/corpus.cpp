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

#include "dupbug/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dupbug/error.hpp"

namespace dupbug {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::optional<IssueId> parse_id(std::string_view s) {
  IssueId value = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool blank(std::string_view line) {
  return trim(line).empty();
}

// Optional text field: absent or null -> nullopt; string -> value; other -> malformed.
bool read_optional_text(const json& record, const char* key, std::optional<std::string>& out) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return true;
  if (!it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

std::optional<BugReport> parse_record(std::string_view line) {
  const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (record.is_discarded() || !record.is_object()) return std::nullopt;

  BugReport report;
  const auto id = record.find("id");
  if (id == record.end()) return std::nullopt;
  if (id->is_number_unsigned()) {
    report.id = id->get<IssueId>();
  } else if (id->is_number_integer() && id->get<std::int64_t>() > 0) {
    report.id = static_cast<IssueId>(id->get<std::int64_t>());
  } else {
    return std::nullopt;
  }
  if (report.id == 0) return std::nullopt;

  const auto summary = record.find("summary");
  if (summary == record.end() || !summary->is_string()) return std::nullopt;
  report.summary = summary->get<std::string>();

  const auto description = record.find("description");
  if (description != record.end() && !description->is_null()) {
    if (!description->is_string()) return std::nullopt;
    report.description = description->get<std::string>();
  }

  const auto created = record.find("created_at");
  if (created == record.end() || !created->is_string()) return std::nullopt;
  const auto created_date = Date::parse(created->get<std::string>());
  if (!created_date) return std::nullopt;
  report.created_at = *created_date;

  const auto resolved = record.find("resolved_at");
  if (resolved != record.end() && !resolved->is_null()) {
    if (!resolved->is_string()) return std::nullopt;
    const auto resolved_date = Date::parse(resolved->get<std::string>());
    if (!resolved_date || *resolved_date < report.created_at) return std::nullopt;
    report.resolved_at = resolved_date;
  }

  if (!read_optional_text(record, "priority", report.priority) ||
      !read_optional_text(record, "component", report.component) ||
      !read_optional_text(record, "status", report.status) ||
      !read_optional_text(record, "resolution", report.resolution) ||
      !read_optional_text(record, "version", report.version)) {
    return std::nullopt;
  }
  return report;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

ReportParseResult parse_reports(std::istream& in) {
  ReportParseResult result;
  std::unordered_map<IssueId, bool> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    auto report = parse_record(line);
    if (!report) {
      ++result.skipped;
      continue;
    }
    if (!seen.emplace(report->id, true).second) {
      ++result.duplicate_ids;
      continue;
    }
    result.reports.push_back(std::move(*report));
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read error while parsing reports");
  return result;
}

ReportParseResult parse_reports(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_reports(in);
}

PairParseResult parse_pairs(std::istream& in, bool swap_columns) {
  PairParseResult result;
  std::string line;
  if (!std::getline(in, line)) return result;  // empty file, no header

  const auto header = split_csv_line(line);
  std::optional<std::size_t> issue_col, dup_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view name = header[i];
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.remove_prefix(3);
    if (name == "issue_id") issue_col = i;
    if (name == "duplicate_id") dup_col = i;
  }
  if (!issue_col || !dup_col) {
    throw Error(ErrorKind::kInput, "pairs header must contain issue_id and duplicate_id");
  }

  while (std::getline(in, line)) {
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max(*issue_col, *dup_col)) {
      ++result.skipped;
      continue;
    }
    const auto issue = parse_id(fields[*issue_col]);
    const auto dup = parse_id(fields[*dup_col]);
    if (!issue || !dup || *issue == 0 || *dup == 0) {
      ++result.skipped;
      continue;
    }
    if (*issue == *dup) {
      ++result.self_pairs;
      continue;
    }
    DuplicatePair pair{*dup, *issue};
    if (swap_columns) std::swap(pair.child_id, pair.parent_id);
    result.pairs.push_back(pair);
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read error while parsing pairs");
  return result;
}

PairParseResult parse_pairs(const std::filesystem::path& path, bool swap_columns) {
  auto in = open_input(path);
  return parse_pairs(in, swap_columns);
}

IssueId DupOrgMap::resolve(IssueId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? id : it->second;
}

InsertOutcome DupOrgMap::insert(const DuplicatePair& pair) {
  if (pair.child_id == pair.parent_id) {
    throw Error(ErrorKind::kValidation,
                "self pair for issue " + std::to_string(pair.child_id));
  }
  const IssueId child_root = resolve(pair.child_id);
  const IssueId parent_root = resolve(pair.parent_id);
  if (child_root == parent_root) return InsertOutcome::kUnchanged;

  // The lowest id of the merged cluster stays canonical.
  const IssueId root = std::min(child_root, parent_root);
  const IssueId demoted = std::max(child_root, parent_root);

  auto& root_children = children_[root];
  if (auto it = children_.find(demoted); it != children_.end()) {
    const std::set<IssueId> moved = std::move(it->second);
    children_.erase(it);
    for (IssueId k : moved) {
      entries_[k] = root;
      root_children.insert(k);
    }
  }
  entries_[demoted] = root;
  root_children.insert(demoted);

  return demoted == pair.child_id ? InsertOutcome::kAdded : InsertOutcome::kDemoted;
}

std::vector<IssueId> DupOrgMap::children_of(IssueId root) const {
  const auto it = children_.find(root);
  if (it == children_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

bool DupOrgMap::satisfies_invariants() const {
  for (const auto& [child, parent] : entries_) {
    if (child == parent || entries_.contains(parent)) return false;
  }
  return true;
}

DupOrgMap build_intermediate_map(const std::vector<DuplicatePair>& pairs, MapBuildStats* stats) {
  DupOrgMap map;
  MapBuildStats local;
  for (const auto& pair : pairs) {
    ++local.pairs;
    if (pair.child_id == pair.parent_id) {
      ++local.rejected;
      continue;
    }
    switch (map.insert(pair)) {
      case InsertOutcome::kUnchanged: ++local.unchanged; break;
      case InsertOutcome::kAdded: ++local.added; break;
      case InsertOutcome::kDemoted: ++local.demotions; break;
    }
  }
  if (stats) *stats = local;
  return map;
}

DupOrgMap merge_maps(const DupOrgMap& first, const DupOrgMap& second, MapBuildStats* stats) {
  std::vector<DuplicatePair> pairs;
  pairs.reserve(second.size());
  for (const auto& [child, parent] : second.entries()) pairs.push_back({child, parent});

  DupOrgMap merged = first;
  MapBuildStats local;
  for (const auto& pair : pairs) {
    ++local.pairs;
    switch (merged.insert(pair)) {
      case InsertOutcome::kUnchanged: ++local.unchanged; break;
      case InsertOutcome::kAdded: ++local.added; break;
      case InsertOutcome::kDemoted: ++local.demotions; break;
    }
  }
  if (stats) *stats = local;
  return merged;
}

void write_map_csv(const DupOrgMap& map, std::ostream& out) {
  out << "child_id,canonical_parent_id\n";
  for (const auto& [child, parent] : map.entries()) out << child << ',' << parent << '\n';
}

void write_map_csv(const DupOrgMap& map, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_map_csv(map, out);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

DupOrgMap read_map_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "child_id,canonical_parent_id") {
    throw Error(ErrorKind::kInput, "map file must start with child_id,canonical_parent_id");
  }
  std::map<IssueId, IssueId> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    const auto child = fields.size() == 2 ? parse_id(fields[0]) : std::nullopt;
    const auto parent = fields.size() == 2 ? parse_id(fields[1]) : std::nullopt;
    if (!child || !parent || !raw.emplace(*child, *parent).second) {
      throw Error(ErrorKind::kInput, "bad map row at line " + std::to_string(line_no));
    }
  }
  DupOrgMap map;
  for (const auto& [child, parent] : raw) {
    if (child == parent) throw Error(ErrorKind::kInput, "map row maps an id to itself");
    map.insert({child, parent});
  }
  if (map.entries() != raw) {
    throw Error(ErrorKind::kInput, "map file is not a flattened lowest-id duplicate map");
  }
  return map;
}

DupOrgMap read_map_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_map_csv(in);
}

CorpusSplit split_corpus(const std::vector<BugReport>& reports, const DupOrgMap& map) {
  std::set<IssueId> corpus;
  for (const auto& r : reports) corpus.insert(r.id);

  CorpusSplit split;
  for (IssueId id : corpus) {
    if (!map.contains(id)) {
      split.train_ids.insert(id);
    } else if (corpus.contains(map.resolve(id))) {
      split.test_ids.insert(id);
    } else {
      split.unresolvable_ids.insert(id);
    }
  }
  for (const auto& [child, parent] : map.entries()) {
    if (!corpus.contains(child)) split.absent_keys.insert(child);
  }
  return split;
}

void write_id_list(const std::set<IssueId>& ids, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (IssueId id : ids) out << id << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::set<IssueId> read_id_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::set<IssueId> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    const auto id = parse_id(trim(line));
    if (!id) throw Error(ErrorKind::kInput, "bad id line in " + path.string());
    ids.insert(*id);
  }
  return ids;
}

std::unordered_map<IssueId, const BugReport*> index_by_id(const std::vector<BugReport>& reports) {
  std::unordered_map<IssueId, const BugReport*> by_id;
  by_id.reserve(reports.size());
  for (const auto& r : reports) by_id.emplace(r.id, &r);
  return by_id;
}

}  // namespace dupbug
