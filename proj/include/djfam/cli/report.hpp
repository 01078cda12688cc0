#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "djfam/common/time.hpp"
#include "djfam/gateway/service.hpp"
#include "djfam/messaging/messaging.hpp"

namespace djfam::cli {

/// One ISO week of dyad activity.
struct WeeklyRow {
  std::string week;  // e.g. "2024-W03"
  TimestampMs week_start = 0;
  std::int64_t sessions = 0;
  std::int64_t parent_shares = 0;
  std::int64_t child_shares = 0;
  /// Distinct recommended songs the member played that week.
  std::int64_t parent_listens = 0;
  std::int64_t child_listens = 0;

  bool operator==(const WeeklyRow&) const = default;
};

/// `weeks` consecutive UTC ISO weeks beginning with the week containing
/// `start`. Sessions are counted per week window.
std::vector<WeeklyRow> weekly_report(const gateway::Dyad& dyad, const std::vector<messaging::Message>& messages,
                                     const std::vector<gateway::PlaybackEvent>& playbacks, TimestampMs start, int weeks,
                                     std::int64_t gap_threshold_s);

/// Earliest message or playback time, if any.
std::optional<TimestampMs> first_activity(const std::vector<messaging::Message>& messages,
                                          const std::vector<gateway::PlaybackEvent>& playbacks);

std::string to_csv(const std::vector<WeeklyRow>& rows);

}  // namespace djfam::cli
