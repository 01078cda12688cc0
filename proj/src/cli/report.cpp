#include "djfam/cli/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "djfam/common/error.hpp"
#include "djfam/messaging/sessions.hpp"

namespace djfam::cli {

std::vector<WeeklyRow> weekly_report(const gateway::Dyad& dyad, const std::vector<messaging::Message>& messages,
                                     const std::vector<gateway::PlaybackEvent>& playbacks, TimestampMs start, int weeks,
                                     std::int64_t gap_threshold_s) {
  if (weeks < 0) fail(ErrorCode::kInvalidArgument, "weeks must be non-negative");
  std::vector<messaging::TimedSeq> timeline;
  timeline.reserve(messages.size());
  for (const auto& m : messages) timeline.push_back({m.seq, m.server_time});

  std::vector<WeeklyRow> rows;
  const TimestampMs first_week = iso_week_start(start);
  for (int w = 0; w < weeks; ++w) {
    const messaging::TimeWindow window{first_week + w * kMsPerWeek, first_week + (w + 1) * kMsPerWeek};
    WeeklyRow row;
    row.week_start = window.start;
    row.week = iso_week_label(window.start);
    row.sessions = static_cast<std::int64_t>(messaging::count_sessions(timeline, window, gap_threshold_s).session_count());

    for (const auto& m : messages) {
      if (m.kind != messaging::MessageKind::kSongShare || !window.contains(m.server_time)) continue;
      (m.sender == dyad.parent ? row.parent_shares : row.child_shares) += 1;
    }
    std::set<catalog::SongId> parent_listened, child_listened;
    for (const auto& p : playbacks) {
      if (!p.from_recommendation || !window.contains(p.at)) continue;
      if (p.user_id == dyad.parent) parent_listened.insert(p.song_id);
      if (p.user_id == dyad.child) child_listened.insert(p.song_id);
    }
    row.parent_listens = static_cast<std::int64_t>(parent_listened.size());
    row.child_listens = static_cast<std::int64_t>(child_listened.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<TimestampMs> first_activity(const std::vector<messaging::Message>& messages,
                                          const std::vector<gateway::PlaybackEvent>& playbacks) {
  std::optional<TimestampMs> first;
  auto consider = [&](TimestampMs t) { first = first ? std::min(*first, t) : t; };
  for (const auto& m : messages) consider(m.server_time);
  for (const auto& p : playbacks) consider(p.at);
  return first;
}

std::string to_csv(const std::vector<WeeklyRow>& rows) {
  std::ostringstream os;
  os << "week,sessions,parent_shares,child_shares,parent_listens,child_listens\n";
  for (const auto& r : rows) {
    os << r.week << ',' << r.sessions << ',' << r.parent_shares << ',' << r.child_shares << ',' << r.parent_listens
       << ',' << r.child_listens << '\n';
  }
  return os.str();
}

}  // namespace djfam::cli
