#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace footprint {

/// Absolute UTC instant with millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;
using Date = std::chrono::year_month_day;

inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp{Millis{ms}}; }
inline std::int64_t epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }

inline double to_seconds(Millis d) { return static_cast<double>(d.count()) / 1000.0; }

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff…](Z|±HH:MM)`. Fractions beyond
/// milliseconds are truncated. A zone designator is mandatory.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// ISO-8601 with explicit `Z`; milliseconds are only printed when non-zero.
std::string format_timestamp(Timestamp t);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// One studied day: local midnight to local midnight, held in UTC.
struct DayWindow {
  Date date{};
  int tz_offset_minutes = 0;
  Timestamp start{};
  Timestamp end{};

  static DayWindow for_date(Date date, int tz_offset_minutes);

  bool contains(Timestamp t) const { return start <= t && t < end; }
  bool operator==(const DayWindow&) const = default;
};

}  // namespace footprint
