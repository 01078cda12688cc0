#include "djfam/messaging/sessions.hpp"

#include "djfam/common/error.hpp"

namespace djfam::messaging {

SessionReport count_sessions(std::span<const TimedSeq> messages, TimeWindow window, std::int64_t gap_threshold_s) {
  if (window.end < window.start) fail(ErrorCode::kInvalidArgument, "window end precedes start");
  if (gap_threshold_s < 0) fail(ErrorCode::kInvalidArgument, "gap threshold must be non-negative");

  SessionReport report{window, gap_threshold_s, {}};
  const TimestampMs gap_ms = gap_threshold_s * kMsPerSecond;
  const TimedSeq* prev = nullptr;
  for (const auto& m : messages) {
    if (!window.contains(m.time)) continue;
    if (prev == nullptr || m.time - prev->time > gap_ms) {
      report.sessions.push_back({m.seq, m.seq, 0});
    }
    auto& current = report.sessions.back();
    current.last_seq = m.seq;
    ++current.message_count;
    prev = &m;
  }
  return report;
}

void to_json(nlohmann::json& j, const SessionReport& r) {
  j = {{"window", {{"start", r.window.start}, {"end", r.window.end}}},
       {"gap_threshold_s", r.gap_threshold_s},
       {"session_count", r.session_count()},
       {"sessions", nlohmann::json::array()}};
  for (const auto& s : r.sessions) {
    j["sessions"].push_back({{"first_seq", s.first_seq}, {"last_seq", s.last_seq}, {"message_count", s.message_count}});
  }
}

}  // namespace djfam::messaging
