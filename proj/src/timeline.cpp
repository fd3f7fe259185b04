#include "footprint/timeline.hpp"

#include <algorithm>
#include <chrono>

namespace footprint {

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::present: return "present";
    case SegmentKind::absent: return "absent";
    case SegmentKind::stationary: return "stationary";
    case SegmentKind::transition: return "transition";
    case SegmentKind::call: return "call";
    case SegmentKind::covered_idle: return "covered-idle";
    case SegmentKind::covered: return "covered";
  }
  return "?";
}

bool parse_segment_kind(std::string_view s, SegmentKind& out) {
  for (auto k : {SegmentKind::present, SegmentKind::absent, SegmentKind::stationary,
                 SegmentKind::transition, SegmentKind::call, SegmentKind::covered_idle,
                 SegmentKind::covered}) {
    if (to_string(k) == s) {
      out = k;
      return true;
    }
  }
  return false;
}

const Track& Timeline::track(Channel c) const {
  switch (c) {
    case Channel::visual: return visual;
    case Channel::location: return location;
    case Channel::call: return call;
    case Channel::sms: return sms;
  }
  return visual;
}

namespace {

struct Label {
  Timestamp start;
  Timestamp end;
  SegmentKind kind;
  std::optional<CallMeta> call;
};

using Layer = std::vector<Label>;

/// Partitions the window. Each layer is sorted and internally disjoint;
/// later layers win. Uncovered time gets `fill`.
std::vector<Segment> paint(const DayWindow& window, const std::vector<Layer>& layers,
                           SegmentKind fill = SegmentKind::absent) {
  std::vector<Timestamp> cuts{window.start, window.end};
  for (const auto& layer : layers) {
    for (const auto& l : layer) {
      if (window.start < l.start && l.start < window.end) cuts.push_back(l.start);
      if (window.start < l.end && l.end < window.end) cuts.push_back(l.end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Id {
    int layer = -1;
    std::size_t index = 0;
    bool operator==(const Id&) const = default;
  };
  auto label_at = [&](Timestamp t) {
    for (int li = static_cast<int>(layers.size()) - 1; li >= 0; --li) {
      const Layer& layer = layers[static_cast<std::size_t>(li)];
      auto it = std::upper_bound(layer.begin(), layer.end(), t,
                                 [](Timestamp v, const Label& l) { return v < l.start; });
      if (it == layer.begin()) continue;
      --it;
      if (it->start <= t && t < it->end) {
        return Id{li, static_cast<std::size_t>(it - layer.begin())};
      }
    }
    return Id{};
  };

  std::vector<Segment> out;
  Id prev_id{-2, 0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Id id = label_at(cuts[i]);
    if (!out.empty() && id == prev_id) {
      out.back().end = cuts[i + 1];
      continue;
    }
    Segment s{cuts[i], cuts[i + 1], fill, std::nullopt};
    if (id.layer >= 0) {
      const Label& l = layers[static_cast<std::size_t>(id.layer)][id.index];
      s.kind = l.kind;
      s.call = l.call;
    }
    out.push_back(s);
    prev_id = id;
  }
  return out;
}

Layer clip_and_merge(Layer labels, const DayWindow& window) {
  Layer clipped;
  for (auto& l : labels) {
    l.start = std::max(l.start, window.start);
    l.end = std::min(l.end, window.end);
    if (l.start < l.end) clipped.push_back(l);
  }
  std::stable_sort(clipped.begin(), clipped.end(),
                   [](const Label& a, const Label& b) { return a.start < b.start; });
  Layer out;
  for (const auto& l : clipped) {
    if (!out.empty() && l.start < out.back().end) {
      out.back().end = std::max(out.back().end, l.end);
    } else {
      out.push_back(l);
    }
  }
  return out;
}

Layer coverage_layer(std::span<const CoverageInterval> coverage, SegmentKind kind,
                     const DayWindow& window) {
  Layer layer;
  for (const auto& c : coverage) layer.push_back({c.start, c.end, kind, std::nullopt});
  return clip_and_merge(std::move(layer), window);
}

}  // namespace

Track build_visual_track(std::span<const ImageSample> images, const DayWindow& window,
                         double gap_s) {
  using namespace std::chrono;
  const auto gap = duration_cast<Millis>(duration<double>(gap_s));
  const auto half_width = duration_cast<Millis>(duration<double>(gap_s / 20.0));

  Layer present;
  std::size_t i = 0;
  while (i < images.size()) {
    std::size_t j = i;
    while (j + 1 < images.size() && images[j + 1].t - images[j].t <= gap) ++j;
    Timestamp start = images[i].t;
    Timestamp end = images[j].t;
    if (start == end) {
      start -= half_width;
      end += half_width;
    }
    present.push_back({start, end, SegmentKind::present, std::nullopt});
    i = j + 1;
  }
  return Track{Channel::visual, paint(window, {clip_and_merge(std::move(present), window)}), {}};
}

Track build_location_track(const DayWindow& window, std::span<const StayPoint> stay_points,
                           std::span<const Transition> transitions) {
  Layer moving, stationary;
  for (const auto& sp : stay_points) {
    if (!window.contains(sp.arrival) || sp.departure > window.end) {
      throw InconsistentInputs("stay point at " + format_timestamp(sp.arrival) +
                               " lies outside the day");
    }
    stationary.push_back({sp.arrival, sp.departure, SegmentKind::stationary, std::nullopt});
  }
  for (const auto& t : transitions) {
    moving.push_back({t.start, t.end, SegmentKind::transition, std::nullopt});
  }
  return Track{Channel::location,
               paint(window, {clip_and_merge(std::move(moving), window),
                              clip_and_merge(std::move(stationary), window)}),
               {}};
}

std::pair<Timestamp, Timestamp> call_span(const ContextEvent& e, const DayWindow& window) {
  const auto length = std::chrono::seconds{std::max<std::int64_t>(e.duration_s, 1)};
  return {e.t, std::min<Timestamp>(e.t + length, window.end)};
}

Track build_call_track(std::span<const ContextEvent> events,
                       std::span<const CoverageInterval> call_coverage, const DayWindow& window) {
  Layer calls;
  for (const auto& e : events) {
    if (e.channel != ContextChannel::call) continue;
    auto [start, end] = call_span(e, window);
    start = std::max(start, window.start);
    if (!(start < end)) continue;
    if (!calls.empty() && start < calls.back().end) {
      auto& merged = calls.back();
      merged.end = std::max(merged.end, end);
      merged.call->calls += 1;
    } else {
      calls.push_back({start, end, SegmentKind::call, CallMeta{e.direction, 0.0, 1}});
    }
  }
  for (auto& c : calls) c.call->duration_s = to_seconds(c.end - c.start);
  return Track{Channel::call,
               paint(window, {coverage_layer(call_coverage, SegmentKind::covered_idle, window),
                              std::move(calls)}),
               {}};
}

Track build_sms_track(std::span<const ContextEvent> events,
                      std::span<const CoverageInterval> sms_coverage, const DayWindow& window) {
  Track track{Channel::sms, paint(window, {coverage_layer(sms_coverage, SegmentKind::covered, window)}),
              {}};
  for (const auto& e : events) {
    if (e.channel == ContextChannel::sms) track.markers.push_back({e.t, e.direction});
  }
  return track;
}

Timeline compile_timeline(const DayLog& day, const DayAnalysis& analysis,
                          const TimelineParams& params) {
  Timeline tl;
  tl.window = day.window;
  tl.visual = build_visual_track(day.images, day.window, params.visual_gap_s);
  tl.location = build_location_track(day.window, analysis.stay_points, analysis.transitions);
  tl.call = build_call_track(day.events, coverage_for(day, Channel::call), day.window);
  tl.sms = build_sms_track(day.events, coverage_for(day, Channel::sms), day.window);
  return tl;
}

std::vector<std::string> check_partition(const Track& track, const DayWindow& window) {
  std::vector<std::string> problems;
  const std::string name(to_string(track.channel));
  if (track.segments.empty()) {
    problems.push_back(name + ": no segments");
    return problems;
  }
  if (track.segments.front().start != window.start) problems.push_back(name + ": does not start at day start");
  if (track.segments.back().end != window.end) problems.push_back(name + ": does not end at day end");
  for (std::size_t i = 0; i < track.segments.size(); ++i) {
    const auto& s = track.segments[i];
    if (!(s.start < s.end)) problems.push_back(name + ": empty segment " + std::to_string(i));
    if (i + 1 < track.segments.size() && s.end != track.segments[i + 1].start) {
      problems.push_back(name + ": gap or overlap after segment " + std::to_string(i));
    }
  }
  return problems;
}

namespace {

Millis overlap(Timestamp a0, Timestamp a1, Timestamp b0, Timestamp b1) {
  const auto lo = std::max(a0, b0);
  const auto hi = std::min(a1, b1);
  return lo < hi ? hi - lo : Millis{0};
}

}  // namespace

WindowData select_window(const DayLog& day, const DayAnalysis& analysis, WindowSelection sel) {
  if (!(day.window.start <= sel.from && sel.from < sel.to && sel.to <= day.window.end)) {
    throw InvalidWindow("window must satisfy day start <= from < to <= day end");
  }
  auto inside = [&](Timestamp t) { return sel.from <= t && t < sel.to; };

  WindowData out;
  out.selection = sel;
  for (const auto& img : day.images) {
    if (inside(img.t)) out.frames.push_back(img);
  }
  for (const auto& f : day.fixes) {
    if (inside(f.t)) out.fixes.push_back(f);
  }
  for (const auto& e : day.events) {
    bool hit = inside(e.t);
    if (!hit && e.channel == ContextChannel::call) {
      auto [s, end] = call_span(e, day.window);
      hit = overlap(s, end, sel.from, sel.to) > Millis{0};
    }
    if (hit) out.events.push_back(e);
  }
  for (std::size_t p = 0; p < analysis.places.size(); ++p) {
    const auto& place = analysis.places[p];
    Millis dwell{0};
    for (std::size_t s : place.visits) {
      const auto& sp = analysis.stay_points.at(s);
      dwell += overlap(sp.arrival, sp.departure, sel.from, sel.to);
    }
    if (dwell > Millis{0}) {
      out.places.push_back(
          {p, place.centroid_lat, place.centroid_lon, to_seconds(dwell), place.total_dwell_s});
    }
  }
  return out;
}

std::vector<FrameEntry> frame_sequence(const WindowData& data) {
  std::vector<FrameEntry> seq;
  seq.reserve(data.frames.size());
  for (const auto& f : data.frames) seq.push_back({f.media_id, f.t, kBaseFrameMs});
  return seq;
}

}  // namespace footprint
