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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dupbug {

/// Calendar day, stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  friend constexpr auto operator<=>(Date, Date) = default;

  /// Whole days from `earlier` to `*this` (negative when `*this` is earlier).
  constexpr std::int32_t days_since(Date earlier) const { return days - earlier.days; }

  constexpr Date minus_days(std::int64_t d) const {
    return Date{static_cast<std::int32_t>(days - d)};
  }

  static Date from_ymd(int year, unsigned month, unsigned day);

  /// Accepts `YYYY-MM-DD`, optionally followed by a `T` or space and a time part
  /// (which is ignored; comparisons are at day resolution).
  static std::optional<Date> parse(std::string_view text);

  std::string iso() const;
};

}  // namespace dupbug
