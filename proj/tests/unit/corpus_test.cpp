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

#include <random>
#include <sstream>

#include "dupbug/corpus.hpp"
#include "dupbug/error.hpp"
#include "testing.hpp"

namespace dupbug {
namespace {

TEST(Date, ParsesIsoDatesAndTimestamps) {
  EXPECT_EQ(Date::parse("1970-01-01")->days, 0);
  EXPECT_EQ(Date::parse("2020-01-11")->days_since(*Date::parse("2020-01-01")), 10);
  EXPECT_EQ(Date::parse("2020-03-01T12:30:00Z"), Date::from_ymd(2020, 3, 1));
  EXPECT_EQ(Date::parse("2020-03-01 08:00"), Date::from_ymd(2020, 3, 1));
  EXPECT_EQ(Date::from_ymd(2016, 2, 29).iso(), "2016-02-29");
}

TEST(Date, RejectsMalformedDates) {
  for (const char* bad : {"", "2020-1-01", "2020/01/01", "2020-02-30", "2020-13-01", "20200101xx",
                          "2020-01-01X", "abcd-ef-gh"}) {
    EXPECT_FALSE(Date::parse(bad).has_value()) << bad;
  }
}

TEST(ParseReports, WellFormedRecords) {
  std::istringstream in(
      R"({"id": 1, "summary": "Crash on start", "description": "boom", "created_at": "2020-01-01"})"
      "\n"
      R"({"id": 2, "summary": "Hang", "created_at": "2020-01-02", "priority": "P1", "component": "UI"})"
      "\n"
      R"({"id": 3, "summary": "Slow", "description": null, "created_at": "2020-01-03T10:00:00Z", "resolved_at": "2020-02-01", "status": "RESOLVED", "resolution": "FIXED", "version": "1.0"})"
      "\n");
  const auto result = parse_reports(in);
  ASSERT_EQ(result.reports.size(), 3u);
  EXPECT_EQ(result.skipped, 0u);
  EXPECT_EQ(result.reports[0].description, "boom");
  EXPECT_EQ(result.reports[1].description, "");
  EXPECT_EQ(result.reports[1].priority, "P1");
  EXPECT_EQ(result.reports[2].resolved_at, Date::from_ymd(2020, 2, 1));
  EXPECT_EQ(result.reports[2].version, "1.0");
}

TEST(ParseReports, SkipsMalformedRecordsWithoutAborting) {
  std::istringstream in(
      R"({"id": 1, "summary": "a", "created_at": "2020-01-01"})"
      "\n"
      R"({"summary": "no id", "created_at": "2020-01-01"})"
      "\n"
      R"({"id": 2, "summary": "b", "created_at": "2020-01-02"})"
      "\n");
  const auto result = parse_reports(in);
  EXPECT_EQ(result.reports.size(), 2u);
  EXPECT_EQ(result.skipped, 1u);
}

TEST(ParseReports, MalformedVariantsAreCounted) {
  std::istringstream in(
      "not json\n"
      R"({"id": -4, "summary": "a", "created_at": "2020-01-01"})" "\n"
      R"({"id": 5, "created_at": "2020-01-01"})" "\n"
      R"({"id": 6, "summary": "a"})" "\n"
      R"({"id": 7, "summary": "a", "created_at": "yesterday"})" "\n"
      R"({"id": 8, "summary": "a", "created_at": "2020-02-01", "resolved_at": "2020-01-01"})" "\n"
      R"({"id": 9, "summary": "a", "created_at": "2020-01-01", "priority": 3})" "\n"
      "\n");
  const auto result = parse_reports(in);
  EXPECT_TRUE(result.reports.empty());
  EXPECT_EQ(result.skipped, 7u);
}

TEST(ParseReports, FirstOccurrenceWins) {
  std::istringstream in(
      R"({"id": 1, "summary": "first", "created_at": "2020-01-01"})" "\n"
      R"({"id": 1, "summary": "second", "created_at": "2020-01-01"})" "\n");
  const auto result = parse_reports(in);
  ASSERT_EQ(result.reports.size(), 1u);
  EXPECT_EQ(result.reports[0].summary, "first");
  EXPECT_EQ(result.duplicate_ids, 1u);
}

TEST(ParseReports, UnreadableSourceIsAnIoError) {
  try {
    parse_reports(std::filesystem::path("/nonexistent/reports.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(ParsePairs, DuplicateColumnIsTheChild) {
  std::istringstream in("issue_id,duplicate_id\n1,2\n1,3\r\n4,4\nx,5\n\n");
  const auto result = parse_pairs(in);
  EXPECT_EQ(result.pairs, (std::vector<DuplicatePair>{{2, 1}, {3, 1}}));
  EXPECT_EQ(result.self_pairs, 1u);
  EXPECT_EQ(result.skipped, 1u);
}

TEST(ParsePairs, ColumnsAreFoundByNameAndCanBeSwapped) {
  std::istringstream reordered("duplicate_id,issue_id\n2,1\n");
  EXPECT_EQ(parse_pairs(reordered).pairs, (std::vector<DuplicatePair>{{2, 1}}));
  std::istringstream swapped("issue_id,duplicate_id\n2,1\n");
  EXPECT_EQ(parse_pairs(swapped, true).pairs, (std::vector<DuplicatePair>{{2, 1}}));
  std::istringstream bad_header("a,b\n1,2\n");
  EXPECT_THROW(parse_pairs(bad_header), Error);
}

std::vector<BugReport> reports_with_ids(std::initializer_list<IssueId> ids) {
  std::vector<BugReport> out;
  for (IssueId id : ids) out.push_back(BugReport{.id = id, .summary = "s"});
  return out;
}

TEST(SplitCorpus, Examples) {
  auto split = split_corpus(reports_with_ids({1, 2, 3}), build_intermediate_map({{3, 1}}));
  EXPECT_EQ(split.train_ids, (std::set<IssueId>{1, 2}));
  EXPECT_EQ(split.test_ids, (std::set<IssueId>{3}));

  split = split_corpus(reports_with_ids({1, 2}), DupOrgMap{});
  EXPECT_EQ(split.train_ids, (std::set<IssueId>{1, 2}));
  EXPECT_TRUE(split.test_ids.empty());
}

TEST(SplitCorpus, MissingParentsAndMissingKeysAreReported) {
  const auto split =
      split_corpus(reports_with_ids({2, 3, 5}), build_intermediate_map({{3, 1}, {4, 2}, {5, 2}}));
  EXPECT_EQ(split.train_ids, (std::set<IssueId>{2}));
  EXPECT_EQ(split.test_ids, (std::set<IssueId>{5}));
  EXPECT_EQ(split.unresolvable_ids, (std::set<IssueId>{3}));
  EXPECT_EQ(split.absent_keys, (std::set<IssueId>{4}));
}

TEST(SplitCorpusProperty, PartitionsTheCorpus) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<IssueId> id(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<DuplicatePair> pairs;
    for (int i = 0; i < 40; ++i) {
      DuplicatePair p{id(rng), id(rng)};
      if (p.child_id != p.parent_id) pairs.push_back(p);
    }
    const auto map = build_intermediate_map(pairs);
    std::vector<BugReport> reports;
    std::set<IssueId> corpus;
    for (IssueId i = 1; i <= 60; ++i) {
      if (rng() % 4 != 0) {
        reports.push_back(BugReport{.id = i});
        corpus.insert(i);
      }
    }
    const auto split = split_corpus(reports, map);
    std::set<IssueId> all = split.train_ids;
    for (IssueId t : split.test_ids) {
      ASSERT_TRUE(all.insert(t).second) << "train/test overlap at " << t;
      ASSERT_TRUE(split.train_ids.contains(map.resolve(t)));
    }
    for (IssueId u : split.unresolvable_ids) ASSERT_TRUE(all.insert(u).second);
    ASSERT_EQ(all, corpus);
  }
}

}  // namespace
}  // namespace dupbug
