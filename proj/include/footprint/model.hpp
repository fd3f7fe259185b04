#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "footprint/time.hpp"

namespace footprint {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const LatLon&) const = default;
};

struct GpsFix {
  Timestamp t{};
  double lat = 0.0;
  double lon = 0.0;

  LatLon position() const { return {lat, lon}; }
  bool operator==(const GpsFix&) const = default;
};

struct ImageSample {
  Timestamp t{};
  std::string media_id;
  std::string path;
  bool operator==(const ImageSample&) const = default;
};

enum class ContextChannel { call, sms };
enum class Direction { incoming, outgoing };

struct ContextEvent {
  Timestamp t{};
  ContextChannel channel = ContextChannel::call;
  Direction direction = Direction::incoming;
  std::int64_t duration_s = 0;
  bool operator==(const ContextEvent&) const = default;
};

/// Recording channels; coverage and timeline tracks are keyed by these.
enum class Channel { visual, location, call, sms };

inline constexpr Channel kAllChannels[] = {Channel::visual, Channel::location, Channel::call,
                                           Channel::sms};

struct CoverageInterval {
  Channel channel = Channel::location;
  Timestamp start{};
  Timestamp end{};
  bool operator==(const CoverageInterval&) const = default;
};

struct DayLog {
  DayWindow window;
  std::vector<GpsFix> fixes;
  std::vector<ImageSample> images;
  std::vector<ContextEvent> events;
  std::vector<CoverageInterval> coverage;

  bool operator==(const DayLog&) const = default;
};

struct Violation {
  std::string field;  // e.g. "fixes[3].lat"
  std::string rule;   // short rule id, e.g. "lat-bounds"
  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Lists every broken DayLog invariant. Empty means the day is well-formed.
ValidationReport validate_day(const DayLog& day);

bool valid_latitude(double lat);
bool valid_longitude(double lon);

std::string_view to_string(Channel c);
std::string_view to_string(ContextChannel c);
std::string_view to_string(Direction d);
bool parse_channel(std::string_view s, Channel& out);
bool parse_context_channel(std::string_view s, ContextChannel& out);
bool parse_direction(std::string_view s, Direction& out);

/// Coverage intervals of one channel, in stored order.
std::vector<CoverageInterval> coverage_for(const DayLog& day, Channel c);

}  // namespace footprint
