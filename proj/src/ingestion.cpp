#include "footprint/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "footprint/csv.hpp"

namespace footprint {

std::string_view to_string(IngestErrorKind kind) {
  switch (kind) {
    case IngestErrorKind::missing_header: return "MissingHeader";
    case IngestErrorKind::malformed_row: return "MalformedRow";
    case IngestErrorKind::conflicting_fix: return "ConflictingFix";
    case IngestErrorKind::malformed_document: return "MalformedDocument";
    case IngestErrorKind::invalid_duration: return "InvalidDuration";
    case IngestErrorKind::duplicate_path: return "DuplicatePath";
    case IngestErrorKind::empty_interval: return "EmptyInterval";
    case IngestErrorKind::empty_day: return "EmptyDay";
  }
  return "?";
}

namespace {

std::string describe(IngestErrorKind kind, std::size_t line, const std::string& detail) {
  std::string s(to_string(kind));
  if (line) s += " (line " + std::to_string(line) + ")";
  if (!detail.empty()) s += ": " + detail;
  return s;
}

}  // namespace

IngestError::IngestError(IngestErrorKind kind, std::size_t line, const std::string& detail)
    : std::runtime_error(describe(kind, line, detail)), kind_(kind), line_(line), detail_(detail) {}

namespace {

/// Checks the byte-exact header and returns the data records.
std::vector<csv::Record> data_records(std::string_view text, std::string_view header) {
  std::string_view first = text.substr(0, text.find('\n'));
  if (!first.empty() && first.back() == '\r') first.remove_suffix(1);
  if (first != header) {
    throw IngestError(IngestErrorKind::missing_header, 1,
                      "expected header '" + std::string(header) + "'");
  }
  std::vector<csv::Record> records;
  try {
    records = csv::read(text);
  } catch (const std::runtime_error& e) {
    throw IngestError(IngestErrorKind::malformed_row, 0, e.what());
  }
  if (!records.empty()) records.erase(records.begin());
  return records;
}

[[noreturn]] void malformed(const csv::Record& r, const std::string& why) {
  throw IngestError(IngestErrorKind::malformed_row, r.line, why);
}

void expect_columns(const csv::Record& r, std::size_t n) {
  if (r.fields.size() != n) {
    malformed(r, "expected " + std::to_string(n) + " columns, got " + std::to_string(r.fields.size()));
  }
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

Timestamp timestamp_field(const csv::Record& r, std::size_t col) {
  auto t = parse_timestamp(r.fields[col]);
  if (!t) malformed(r, "unparseable timestamp '" + r.fields[col] + "'");
  return *t;
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Sorts by time, collapses exact duplicates, rejects same-time conflicts.
std::vector<GpsFix> normalize_fixes(std::vector<GpsFix> fixes) {
  std::stable_sort(fixes.begin(), fixes.end(),
                   [](const GpsFix& a, const GpsFix& b) { return a.t < b.t; });
  std::vector<GpsFix> out;
  out.reserve(fixes.size());
  for (const auto& f : fixes) {
    if (!out.empty() && out.back().t == f.t) {
      if (out.back() == f) continue;
      throw IngestError(IngestErrorKind::conflicting_fix, 0,
                        "two positions at " + format_timestamp(f.t));
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace

std::vector<GpsFix> parse_gps_csv(std::string_view text) {
  std::vector<GpsFix> fixes;
  for (const auto& r : data_records(text, "timestamp,lat,lon")) {
    expect_columns(r, 3);
    GpsFix f;
    f.t = timestamp_field(r, 0);
    if (!parse_double(r.fields[1], f.lat) || !parse_double(r.fields[2], f.lon)) {
      malformed(r, "unparseable coordinate");
    }
    if (!valid_latitude(f.lat) || !valid_longitude(f.lon)) malformed(r, "coordinate out of bounds");
    fixes.push_back(f);
  }
  return normalize_fixes(std::move(fixes));
}

namespace {

namespace pt = boost::property_tree;

std::string_view local_name(std::string_view tag) {
  auto colon = tag.rfind(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

void collect_trkpts(const pt::ptree& node, GpxResult& out, std::vector<GpsFix>& fixes,
                    std::size_t& index) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (local_name(tag) != "trkpt") {
      collect_trkpts(child, out, fixes, index);
      continue;
    }
    const std::size_t this_index = index++;
    auto lat = child.get_optional<std::string>("<xmlattr>.lat");
    auto lon = child.get_optional<std::string>("<xmlattr>.lon");
    GpsFix f;
    if (!lat || !lon || !parse_double(*lat, f.lat) || !parse_double(*lon, f.lon) ||
        !valid_latitude(f.lat) || !valid_longitude(f.lon)) {
      throw IngestError(IngestErrorKind::malformed_document, 0,
                        "trkpt #" + std::to_string(this_index) + " has invalid lat/lon");
    }
    std::optional<std::string> time;
    for (const auto& [ctag, cnode] : child) {
      if (local_name(ctag) == "time") time = cnode.data();
    }
    if (!time) {
      out.warnings.push_back("trkpt #" + std::to_string(this_index) + " has no time; skipped");
      continue;
    }
    auto t = parse_timestamp(*time);
    if (!t) {
      throw IngestError(IngestErrorKind::malformed_document, 0,
                        "trkpt #" + std::to_string(this_index) + " has unparseable time");
    }
    f.t = *t;
    fixes.push_back(f);
  }
}

}  // namespace

GpxResult parse_gpx(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw IngestError(IngestErrorKind::malformed_document, e.line(), e.message());
  }
  GpxResult result;
  std::vector<GpsFix> fixes;
  std::size_t index = 0;
  collect_trkpts(tree, result, fixes, index);
  result.fixes = normalize_fixes(std::move(fixes));
  return result;
}

std::vector<ContextEvent> parse_context_csv(std::string_view text) {
  std::vector<ContextEvent> events;
  for (const auto& r : data_records(text, "timestamp,channel,direction,duration_s")) {
    expect_columns(r, 4);
    ContextEvent e;
    e.t = timestamp_field(r, 0);
    if (!parse_context_channel(r.fields[1], e.channel)) malformed(r, "unknown channel '" + r.fields[1] + "'");
    if (r.fields[2] == "in") {
      e.direction = Direction::incoming;
    } else if (r.fields[2] == "out") {
      e.direction = Direction::outgoing;
    } else {
      malformed(r, "unknown direction '" + r.fields[2] + "'");
    }
    if (!parse_int(r.fields[3], e.duration_s)) malformed(r, "unparseable duration");
    if (e.duration_s < 0) {
      throw IngestError(IngestErrorKind::invalid_duration, r.line, "negative duration");
    }
    if (e.channel == ContextChannel::sms && e.duration_s != 0) {
      throw IngestError(IngestErrorKind::invalid_duration, r.line, "sms rows must have duration 0");
    }
    events.push_back(e);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ContextEvent& a, const ContextEvent& b) { return a.t < b.t; });
  return events;
}

std::vector<ImageSample> parse_image_manifest(std::string_view text, Date date) {
  std::vector<ImageSample> images;
  std::set<std::string> paths;
  for (const auto& r : data_records(text, "timestamp,path")) {
    expect_columns(r, 2);
    ImageSample img;
    img.t = timestamp_field(r, 0);
    img.path = r.fields[1];
    if (img.path.empty()) malformed(r, "empty path");
    if (!paths.insert(img.path).second) {
      throw IngestError(IngestErrorKind::duplicate_path, r.line, img.path);
    }
    images.push_back(std::move(img));
  }
  std::stable_sort(images.begin(), images.end(),
                   [](const ImageSample& a, const ImageSample& b) { return a.t < b.t; });
  const std::string prefix = format_date(date) + "#";
  for (std::size_t i = 0; i < images.size(); ++i) {
    char idx[16];
    std::snprintf(idx, sizeof idx, "%06zu", i);
    images[i].media_id = prefix + idx;
  }
  return images;
}

std::vector<CoverageInterval> parse_coverage_csv(std::string_view text) {
  std::vector<CoverageInterval> raw;
  for (const auto& r : data_records(text, "channel,start,end")) {
    expect_columns(r, 3);
    CoverageInterval c;
    if (!parse_channel(r.fields[0], c.channel)) malformed(r, "unknown channel '" + r.fields[0] + "'");
    c.start = timestamp_field(r, 1);
    c.end = timestamp_field(r, 2);
    if (!(c.start < c.end)) {
      throw IngestError(IngestErrorKind::empty_interval, r.line, "start must precede end");
    }
    raw.push_back(c);
  }
  std::sort(raw.begin(), raw.end(), [](const CoverageInterval& a, const CoverageInterval& b) {
    if (a.channel != b.channel) return a.channel < b.channel;
    return a.start < b.start;
  });
  std::vector<CoverageInterval> merged;
  for (const auto& c : raw) {
    if (!merged.empty() && merged.back().channel == c.channel && c.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, c.end);
    } else {
      merged.push_back(c);
    }
  }
  return merged;
}

IngestManifest parse_manifest(std::string_view text) {
  using nlohmann::json;
  auto bad = [](const std::string& why) {
    return IngestError(IngestErrorKind::malformed_document, 0, "manifest: " + why);
  };
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw bad(e.what());
  }
  if (!doc.is_object()) throw bad("expected an object");

  IngestManifest m;
  if (!doc.contains("date") || !doc["date"].is_string()) throw bad("missing 'date'");
  auto date = parse_date(doc["date"].get<std::string>());
  if (!date) throw bad("invalid 'date'");
  m.date = *date;
  if (doc.contains("tz_offset_minutes")) {
    if (!doc["tz_offset_minutes"].is_number_integer()) throw bad("'tz_offset_minutes' must be an integer");
    m.tz_offset_minutes = doc["tz_offset_minutes"].get<int>();
    if (m.tz_offset_minutes < -24 * 60 || m.tz_offset_minutes > 24 * 60) {
      throw bad("'tz_offset_minutes' out of range");
    }
  }
  auto path = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    if (!doc[key].is_string()) throw bad(std::string("'") + key + "' must be a path string");
    return doc[key].get<std::string>();
  };
  m.gps_path = path("gps");
  m.context_path = path("context");
  m.images_path = path("images");
  m.coverage_path = path("coverage");
  if (!m.gps_path && !m.context_path && !m.images_path && !m.coverage_path) {
    throw bad("no channel paths");
  }
  return m;
}

namespace {

template <typename T>
std::vector<T> keep_in_window(std::vector<T> items, const DayWindow& w, std::string_view what,
                              std::vector<std::string>& warnings) {
  std::vector<T> kept;
  kept.reserve(items.size());
  for (auto& item : items) {
    if (w.contains(item.t)) {
      kept.push_back(std::move(item));
    } else {
      warnings.push_back(std::string(what) + " at " + format_timestamp(item.t) +
                         " lies outside the day; dropped");
    }
  }
  return kept;
}

void add_default_coverage(std::vector<CoverageInterval>& coverage, Channel c,
                          const std::vector<Timestamp>& times) {
  if (times.empty()) return;
  auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  if (*lo < *hi) coverage.push_back({c, *lo, *hi});
}

}  // namespace

AssembledDay assemble_day(Date date, int tz_offset_minutes, ParsedChannels channels) {
  AssembledDay out;
  DayLog& day = out.day;
  day.window = DayWindow::for_date(date, tz_offset_minutes);
  auto& warnings = out.warnings;

  day.fixes = keep_in_window(normalize_fixes(std::move(channels.fixes)), day.window, "fix", warnings);
  std::stable_sort(channels.images.begin(), channels.images.end(),
                   [](const ImageSample& a, const ImageSample& b) { return a.t < b.t; });
  day.images = keep_in_window(std::move(channels.images), day.window, "image", warnings);
  std::stable_sort(channels.events.begin(), channels.events.end(),
                   [](const ContextEvent& a, const ContextEvent& b) { return a.t < b.t; });
  day.events = keep_in_window(std::move(channels.events), day.window, "event", warnings);

  if (day.fixes.empty() && day.images.empty() && day.events.empty()) {
    throw IngestError(IngestErrorKind::empty_day, 0, "no samples inside " + format_date(date));
  }

  std::set<Channel> explicit_channels;
  if (channels.coverage) {
    for (auto c : *channels.coverage) {
      if (c.end <= day.window.start || c.start >= day.window.end) {
        warnings.push_back(std::string("coverage ") + std::string(to_string(c.channel)) + " " +
                           format_timestamp(c.start) + " lies outside the day; dropped");
        continue;
      }
      c.start = std::max(c.start, day.window.start);
      c.end = std::min(c.end, day.window.end);
      day.coverage.push_back(c);
      explicit_channels.insert(c.channel);
    }
  }

  auto times_of = [](const auto& items, auto pred) {
    std::vector<Timestamp> ts;
    for (const auto& x : items) {
      if (pred(x)) ts.push_back(x.t);
    }
    return ts;
  };
  auto all = [](const auto&) { return true; };
  for (Channel c : kAllChannels) {
    if (explicit_channels.contains(c)) continue;
    switch (c) {
      case Channel::visual: add_default_coverage(day.coverage, c, times_of(day.images, all)); break;
      case Channel::location: add_default_coverage(day.coverage, c, times_of(day.fixes, all)); break;
      case Channel::call:
        add_default_coverage(day.coverage, c, times_of(day.events, [](const ContextEvent& e) {
                               return e.channel == ContextChannel::call;
                             }));
        break;
      case Channel::sms:
        add_default_coverage(day.coverage, c, times_of(day.events, [](const ContextEvent& e) {
                               return e.channel == ContextChannel::sms;
                             }));
        break;
    }
  }
  std::stable_sort(day.coverage.begin(), day.coverage.end(),
                   [](const CoverageInterval& a, const CoverageInterval& b) {
                     if (a.channel != b.channel) return a.channel < b.channel;
                     return a.start < b.start;
                   });
  return out;
}

std::string write_gps_csv(const std::vector<GpsFix>& fixes) {
  std::string out = "timestamp,lat,lon\n";
  for (const auto& f : fixes) {
    out += format_timestamp(f.t) + "," + format_number(f.lat) + "," + format_number(f.lon) + "\n";
  }
  return out;
}

std::string write_context_csv(const std::vector<ContextEvent>& events) {
  std::string out = "timestamp,channel,direction,duration_s\n";
  for (const auto& e : events) {
    out += format_timestamp(e.t) + "," + std::string(to_string(e.channel)) + "," +
           (e.direction == Direction::incoming ? "in" : "out") + "," +
           std::to_string(e.duration_s) + "\n";
  }
  return out;
}

std::string write_image_manifest(const std::vector<ImageSample>& images) {
  std::string out = "timestamp,path\n";
  for (const auto& img : images) out += csv::join({format_timestamp(img.t), img.path}) + "\n";
  return out;
}

std::string write_coverage_csv(const std::vector<CoverageInterval>& coverage) {
  std::string out = "channel,start,end\n";
  for (const auto& c : coverage) {
    out += std::string(to_string(c.channel)) + "," + format_timestamp(c.start) + "," +
           format_timestamp(c.end) + "\n";
  }
  return out;
}

}  // namespace footprint
