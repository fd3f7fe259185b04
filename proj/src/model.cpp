#include "footprint/model.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace footprint {

bool valid_latitude(double lat) { return std::isfinite(lat) && lat >= -90.0 && lat <= 90.0; }
bool valid_longitude(double lon) { return std::isfinite(lon) && lon >= -180.0 && lon <= 180.0; }

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::visual: return "visual";
    case Channel::location: return "location";
    case Channel::call: return "call";
    case Channel::sms: return "sms";
  }
  return "?";
}

std::string_view to_string(ContextChannel c) { return c == ContextChannel::call ? "call" : "sms"; }

std::string_view to_string(Direction d) {
  return d == Direction::incoming ? "incoming" : "outgoing";
}

bool parse_channel(std::string_view s, Channel& out) {
  for (Channel c : kAllChannels) {
    if (to_string(c) == s) {
      out = c;
      return true;
    }
  }
  return false;
}

bool parse_context_channel(std::string_view s, ContextChannel& out) {
  if (s == "call") {
    out = ContextChannel::call;
  } else if (s == "sms") {
    out = ContextChannel::sms;
  } else {
    return false;
  }
  return true;
}

bool parse_direction(std::string_view s, Direction& out) {
  if (s == "incoming") {
    out = Direction::incoming;
  } else if (s == "outgoing") {
    out = Direction::outgoing;
  } else {
    return false;
  }
  return true;
}

std::vector<CoverageInterval> coverage_for(const DayLog& day, Channel c) {
  std::vector<CoverageInterval> out;
  for (const auto& iv : day.coverage) {
    if (iv.channel == c) out.push_back(iv);
  }
  return out;
}

namespace {

std::string at(std::string_view list, std::size_t i, std::string_view field = {}) {
  std::string s(list);
  s += '[' + std::to_string(i) + ']';
  if (!field.empty()) {
    s += '.';
    s += field;
  }
  return s;
}

}  // namespace

ValidationReport validate_day(const DayLog& day) {
  ValidationReport report;
  auto add = [&](std::string field, std::string rule) {
    report.push_back({std::move(field), std::move(rule)});
  };

  const DayWindow& w = day.window;
  if (!w.date.ok()) add("window.date", "valid-date");
  if (w.end - w.start != std::chrono::hours{24}) add("window.end", "day-length-24h");
  if (w.date.ok() && w.start != DayWindow::for_date(w.date, w.tz_offset_minutes).start) {
    add("window.start", "local-midnight");
  }

  for (std::size_t i = 0; i < day.fixes.size(); ++i) {
    const auto& f = day.fixes[i];
    if (!valid_latitude(f.lat)) add(at("fixes", i, "lat"), "lat-bounds");
    if (!valid_longitude(f.lon)) add(at("fixes", i, "lon"), "lon-bounds");
    if (!w.contains(f.t)) add(at("fixes", i, "t"), "in-window");
    if (i > 0 && !(day.fixes[i - 1].t < f.t)) add(at("fixes", i, "t"), "strictly-sorted");
  }

  std::set<std::string_view> media_ids;
  for (std::size_t i = 0; i < day.images.size(); ++i) {
    const auto& img = day.images[i];
    if (!w.contains(img.t)) add(at("images", i, "t"), "in-window");
    if (i > 0 && img.t < day.images[i - 1].t) add(at("images", i, "t"), "sorted");
    if (img.path.empty()) add(at("images", i, "path"), "non-empty");
    if (img.media_id.empty()) add(at("images", i, "media_id"), "non-empty");
    if (!media_ids.insert(img.media_id).second) add(at("images", i, "media_id"), "unique");
  }

  for (std::size_t i = 0; i < day.events.size(); ++i) {
    const auto& e = day.events[i];
    if (!w.contains(e.t)) add(at("events", i, "t"), "in-window");
    if (i > 0 && e.t < day.events[i - 1].t) add(at("events", i, "t"), "sorted");
    if (e.duration_s < 0) add(at("events", i, "duration_s"), "non-negative");
    if (e.channel == ContextChannel::sms && e.duration_s != 0) {
      add(at("events", i, "duration_s"), "sms-zero-duration");
    }
  }

  for (std::size_t i = 0; i < day.coverage.size(); ++i) {
    const auto& c = day.coverage[i];
    if (!(c.start < c.end)) add(at("coverage", i), "start-before-end");
    if (c.start < w.start || c.end > w.end) add(at("coverage", i), "in-window");
  }
  return report;
}

}  // namespace footprint
