#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "djfam/common/time.hpp"
#include "json.hpp"

namespace djfam::messaging {

inline constexpr std::int64_t kDefaultSessionGapSeconds = 1800;

/// Half-open time range [start, end).
struct TimeWindow {
  TimestampMs start = 0;
  TimestampMs end = 0;

  bool contains(TimestampMs t) const { return t >= start && t < end; }
};

struct SessionSpan {
  std::int64_t first_seq = 0;
  std::int64_t last_seq = 0;
  std::int64_t message_count = 0;

  bool operator==(const SessionSpan&) const = default;
};

struct SessionReport {
  TimeWindow window;
  std::int64_t gap_threshold_s = kDefaultSessionGapSeconds;
  std::vector<SessionSpan> sessions;

  std::size_t session_count() const { return sessions.size(); }
};

struct TimedSeq {
  std::int64_t seq = 0;
  TimestampMs time = 0;
};

/// Groups seq-ordered messages inside `window` into sessions: a gap longer
/// than `gap_threshold_s` between consecutive messages starts a new one.
SessionReport count_sessions(std::span<const TimedSeq> messages, TimeWindow window,
                             std::int64_t gap_threshold_s = kDefaultSessionGapSeconds);

void to_json(nlohmann::json& j, const SessionReport& r);

}  // namespace djfam::messaging
