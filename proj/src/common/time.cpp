#include "djfam/common/time.hpp"

#include <chrono>
#include <cstdio>

#include "djfam/common/error.hpp"

namespace djfam {

namespace chr = std::chrono;

Clock system_clock() {
  return [] {
    return chr::duration_cast<chr::milliseconds>(chr::system_clock::now().time_since_epoch())
        .count();
  };
}

namespace {

// Floor division for negative timestamps.
TimestampMs floor_div(TimestampMs a, TimestampMs b) {
  TimestampMs q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

chr::sys_days to_days(TimestampMs t) {
  return chr::sys_days(chr::days(floor_div(t, kMsPerDay)));
}

}  // namespace

TimestampMs iso_week_start(TimestampMs t) {
  auto day = to_days(t);
  chr::weekday wd(day);
  auto monday = day - chr::days((wd.c_encoding() + 6) % 7);
  return monday.time_since_epoch().count() * kMsPerDay;
}

std::string iso_week_label(TimestampMs t) {
  // The ISO year is the year of the Thursday in the same week.
  auto thursday = to_days(iso_week_start(t)) + chr::days(3);
  chr::year_month_day ymd(thursday);
  chr::sys_days jan1 = chr::year_month_day(ymd.year(), chr::January, chr::day(1));
  int week = static_cast<int>((thursday - jan1).count() / 7) + 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-W%02d", static_cast<int>(ymd.year()), week);
  return buf;
}

TimestampMs parse_utc_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
    fail(ErrorCode::kInvalidArgument, "expected YYYY-MM-DD, got '" + text + "'");
  }
  chr::year_month_day ymd{chr::year(y), chr::month(m), chr::day(d)};
  if (!ymd.ok()) fail(ErrorCode::kInvalidArgument, "invalid date '" + text + "'");
  return chr::sys_days(ymd).time_since_epoch().count() * kMsPerDay;
}

std::string format_utc(TimestampMs t) {
  auto day = to_days(t);
  chr::year_month_day ymd(day);
  TimestampMs rem = t - day.time_since_epoch().count() * kMsPerDay;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(rem / 3'600'000),
                static_cast<long long>(rem / 60'000 % 60), static_cast<long long>(rem / 1000 % 60),
                static_cast<long long>(rem % 1000));
  return buf;
}

}  // namespace djfam
