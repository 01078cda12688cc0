#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace djfam {

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

using Clock = std::function<TimestampMs()>;

Clock system_clock();

inline constexpr TimestampMs kMsPerSecond = 1000;
inline constexpr TimestampMs kMsPerDay = 86'400'000;
inline constexpr TimestampMs kMsPerWeek = 7 * kMsPerDay;

/// Start of the ISO week (Monday 00:00 UTC) containing `t`.
TimestampMs iso_week_start(TimestampMs t);

/// ISO-8601 week label such as "2024-W03".
std::string iso_week_label(TimestampMs t);

/// Parses "YYYY-MM-DD" as midnight UTC.
TimestampMs parse_utc_date(const std::string& text);

std::string format_utc(TimestampMs t);

}  // namespace djfam
