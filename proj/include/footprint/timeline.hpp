#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "footprint/geo.hpp"
#include "footprint/model.hpp"

namespace footprint {

/// Segment kinds of the four bars. The UI maps them to colors:
///   present → green, stationary → solid green, transition → dashed green,
///   call → solid green span, absent → blue; covered-idle and covered are
///   neutral background (device on, nothing happened).
enum class SegmentKind { present, absent, stationary, transition, call, covered_idle, covered };

std::string_view to_string(SegmentKind kind);
bool parse_segment_kind(std::string_view s, SegmentKind& out);

struct CallMeta {
  Direction direction = Direction::incoming;  // of the earliest merged call
  double duration_s = 0.0;                    // segment length
  std::size_t calls = 1;
  bool operator==(const CallMeta&) const = default;
};

/// Half-open [start, end).
struct Segment {
  Timestamp start{};
  Timestamp end{};
  SegmentKind kind = SegmentKind::absent;
  std::optional<CallMeta> call;
  bool operator==(const Segment&) const = default;
};

struct SmsMarker {
  Timestamp t{};
  Direction direction = Direction::incoming;
  bool operator==(const SmsMarker&) const = default;
};

struct Track {
  Channel channel = Channel::visual;
  std::vector<Segment> segments;
  std::vector<SmsMarker> markers;  // sms track only
  bool operator==(const Track&) const = default;
};

struct Timeline {
  DayWindow window;
  Track visual;
  Track location;
  Track call;
  Track sms;

  const Track& track(Channel c) const;
  bool operator==(const Timeline&) const = default;
};

struct TimelineParams {
  double visual_gap_s = 600.0;
};

class InconsistentInputs : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Images closer than gap_s merge into one present span; a cluster with zero
/// span is widened to gap_s/10 centred on it.
Track build_visual_track(std::span<const ImageSample> images, const DayWindow& window,
                         double gap_s = 600.0);

/// Stay spans are stationary, transitions are transition, the rest absent.
/// Throws InconsistentInputs for a stay point outside the window.
Track build_location_track(const DayWindow& window, std::span<const StayPoint> stay_points,
                           std::span<const Transition> transitions);

Track build_call_track(std::span<const ContextEvent> events,
                       std::span<const CoverageInterval> call_coverage, const DayWindow& window);

Track build_sms_track(std::span<const ContextEvent> events,
                      std::span<const CoverageInterval> sms_coverage, const DayWindow& window);

Timeline compile_timeline(const DayLog& day, const DayAnalysis& analysis,
                          const TimelineParams& params = {});

/// Span a call occupies on the bar: [t, t + max(duration, 1 s)) clipped to the day.
std::pair<Timestamp, Timestamp> call_span(const ContextEvent& e, const DayWindow& window);

/// Describes partition defects; empty when segments tile the day exactly.
std::vector<std::string> check_partition(const Track& track, const DayWindow& window);

struct WindowSelection {
  Timestamp from{};
  Timestamp to{};
};

struct WindowPlace {
  std::size_t place = 0;  // index into DayAnalysis::places
  double centroid_lat = 0.0;
  double centroid_lon = 0.0;
  double window_dwell_s = 0.0;
  double total_dwell_s = 0.0;
  bool operator==(const WindowPlace&) const = default;
};

struct WindowData {
  WindowSelection selection;
  std::vector<ImageSample> frames;
  std::vector<GpsFix> fixes;
  std::vector<WindowPlace> places;
  std::vector<ContextEvent> events;
};

/// Throws InvalidWindow unless day.start <= from < to <= day.end.
WindowData select_window(const DayLog& day, const DayAnalysis& analysis, WindowSelection sel);

struct FrameEntry {
  std::string media_id;
  Timestamp t{};
  int suggested_display_ms = 500;
  bool operator==(const FrameEntry&) const = default;
};

inline constexpr int kBaseFrameMs = 500;

/// Playback order at 1x; consumers divide by speed and reverse for rewind.
std::vector<FrameEntry> frame_sequence(const WindowData& data);

}  // namespace footprint
