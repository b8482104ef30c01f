#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace hadithscope {

using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

/// Twitter `created_at`, e.g. "Wed Oct 10 20:19:24 +0000 2018".
std::optional<Timestamp> parse_twitter_time(std::string_view text);

/// RFC 3339 / ISO 8601 instant: "2019-01-01T12:00:00Z" or with "+hh:mm"
/// offset; fractional seconds are truncated.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Accepts either of the formats above.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_rfc3339(Timestamp ts);

std::optional<Day> parse_date(std::string_view text);
std::string format_date(Day day);

inline Day utc_day(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

/// Inclusive range of UTC calendar days.
struct DayWindow {
  Day first;
  Day last;

  std::size_t days() const {
    return last < first ? 0 : static_cast<std::size_t>((last - first).count() + 1);
  }
  bool contains(Day d) const { return d >= first && d <= last; }

  friend bool operator==(const DayWindow&, const DayWindow&) = default;
};

}  // namespace hadithscope
