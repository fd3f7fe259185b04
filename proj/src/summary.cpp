#include "footprint/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace footprint {

namespace {

constexpr int kColumns = 96;

char glyph(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::present: return '#';
    case SegmentKind::stationary: return '=';
    case SegmentKind::transition: return '~';
    case SegmentKind::call: return 'C';
    case SegmentKind::covered_idle:
    case SegmentKind::covered: return '-';
    case SegmentKind::absent: return '.';
  }
  return '?';
}

/// Each column shows the recorded kind covering most of its time. Absent only
/// shows when nothing else touches the column, and any call wins, so short
/// bursts stay visible.
std::string bar(const Track& track, const DayWindow& w) {
  const auto span = (w.end - w.start) / kColumns;
  std::string out(kColumns, '.');
  for (int col = 0; col < kColumns; ++col) {
    const Timestamp c0 = w.start + span * col;
    const Timestamp c1 = c0 + span;
    std::map<SegmentKind, Millis> share;
    for (const auto& s : track.segments) {
      const auto lo = std::max(s.start, c0);
      const auto hi = std::min(s.end, c1);
      if (lo < hi) share[s.kind] += hi - lo;
    }
    SegmentKind best = SegmentKind::absent;
    Millis best_share{-1};
    for (const auto& [kind, ms] : share) {
      if (kind == SegmentKind::absent && share.size() > 1) continue;
      if (ms > best_share) {
        best = kind;
        best_share = ms;
      }
    }
    if (share.contains(SegmentKind::call)) best = SegmentKind::call;
    out[static_cast<std::size_t>(col)] = glyph(best);
  }
  for (const auto& m : track.markers) {
    const auto col = static_cast<std::size_t>((m.t - w.start) / span);
    if (col < out.size()) out[col] = m.direction == Direction::incoming ? '!' : '^';
  }
  return out;
}

std::string hms(double seconds) {
  const auto total = static_cast<long long>(seconds);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lldh%02lldm%02llds", total / 3600, (total / 60) % 60, total % 60);
  return buf;
}

std::string tz_label(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", minutes < 0 ? '-' : '+', std::abs(minutes) / 60,
                std::abs(minutes) % 60);
  return buf;
}

}  // namespace

std::string render_summary(const DayLog& day, const DayAnalysis& analysis, const Timeline& timeline) {
  std::ostringstream out;
  out << "day " << format_date(day.window.date) << " (utc" << tz_label(day.window.tz_offset_minutes) << ")\n";
  out << "window " << format_timestamp(day.window.start) << " .. " << format_timestamp(day.window.end)
      << "\n\n";

  out << "tracks\n";
  for (Channel c : kAllChannels) {
    const Track& t = timeline.track(c);
    std::map<std::string_view, int> kinds;
    for (const auto& s : t.segments) ++kinds[to_string(s.kind)];
    char name[16];
    std::snprintf(name, sizeof name, "%-9s", std::string(to_string(c)).c_str());
    out << "  " << name << t.segments.size() << " segments";
    for (const auto& [k, n] : kinds) out << "  " << k << "=" << n;
    if (c == Channel::sms) out << "  markers=" << t.markers.size();
    out << "\n";
  }

  out << "\nbars (one column = 15 min, local midnight to midnight)\n";
  for (Channel c : kAllChannels) {
    char name[16];
    std::snprintf(name, sizeof name, "%-9s", std::string(to_string(c)).c_str());
    out << "  " << name << "|" << bar(timeline.track(c), day.window) << "|\n";
  }
  out << "  legend   # present  = stationary  ~ transition  C call  - covered  . absent  ! sms in  ^ sms out\n";

  out << "\nplaces (by dwell)\n";
  if (analysis.places.empty()) out << "  none\n";
  for (std::size_t p = 0; p < analysis.places.size(); ++p) {
    const auto& place = analysis.places[p];
    char line[160];
    std::snprintf(line, sizeof line, "  #%zu  %.6f,%.6f  dwell %s  visits %zu\n", p, place.centroid_lat,
                  place.centroid_lon, hms(place.total_dwell_s).c_str(), place.visits.size());
    out << line;
  }

  std::size_t calls = 0, sms_in = 0, sms_out = 0;
  std::int64_t call_s = 0;
  for (const auto& e : day.events) {
    if (e.channel == ContextChannel::call) {
      ++calls;
      call_s += e.duration_s;
    } else if (e.direction == Direction::incoming) {
      ++sms_in;
    } else {
      ++sms_out;
    }
  }
  out << "\ntotals\n";
  out << "  fixes " << day.fixes.size() << "  images " << day.images.size() << "\n";
  out << "  calls " << calls << " (" << call_s << " s)  sms " << sms_in + sms_out << " (in " << sms_in
      << ", out " << sms_out << ")\n";
  out << "  stay points " << analysis.stay_points.size() << "  transitions " << analysis.transitions.size()
      << "  places " << analysis.places.size() << "\n";
  return out.str();
}

}  // namespace footprint
