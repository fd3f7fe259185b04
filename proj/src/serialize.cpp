#include "footprint/serialize.hpp"

namespace footprint {

std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

Json ts(Timestamp t) { return format_timestamp(t); }

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type");
  }
}

const Json& array_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    throw FormatError(std::string("field '") + key + "' must be an array");
  }
  return j.at(key);
}

const Json& sub(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

Timestamp ts_field(const Json& j, const char* key) {
  auto t = parse_timestamp(field<std::string>(j, key));
  if (!t) throw FormatError(std::string("field '") + key + "' is not an ISO-8601 timestamp");
  return *t;
}

Json opt_index(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::size_t> opt_index_field(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<std::size_t>(j, key);
}

Direction direction_field(const Json& j, const char* key) {
  Direction d;
  if (!parse_direction(field<std::string>(j, key), d)) throw FormatError("bad direction");
  return d;
}

Json to_json(const CoverageInterval& c) {
  return {{"channel", to_string(c.channel)}, {"start", ts(c.start)}, {"end", ts(c.end)}};
}

Json to_json(const StayPoint& sp) {
  return {{"centroid_lat", sp.centroid_lat},
          {"centroid_lon", sp.centroid_lon},
          {"arrival", ts(sp.arrival)},
          {"departure", ts(sp.departure)},
          {"dwell_s", to_seconds(sp.dwell())},
          {"member_range", {sp.first, sp.last}}};
}

Json to_json(const Segment& s) {
  Json meta = Json::object();
  if (s.call) {
    meta["direction"] = to_string(s.call->direction);
    meta["duration_s"] = s.call->duration_s;
    meta["calls"] = s.call->calls;
  }
  return {{"start", ts(s.start)}, {"end", ts(s.end)}, {"kind", to_string(s.kind)}, {"meta", meta}};
}

Track track_from_json(const Json& j, Channel channel) {
  Track t;
  t.channel = channel;
  for (const auto& s : array_field(j, "segments")) {
    Segment seg;
    seg.start = ts_field(s, "start");
    seg.end = ts_field(s, "end");
    if (!parse_segment_kind(field<std::string>(s, "kind"), seg.kind)) throw FormatError("bad segment kind");
    if (seg.kind == SegmentKind::call) {
      const Json& meta = sub(s, "meta");
      seg.call = CallMeta{direction_field(meta, "direction"), field<double>(meta, "duration_s"),
                          field<std::size_t>(meta, "calls")};
    }
    t.segments.push_back(seg);
  }
  if (j.contains("markers")) {
    for (const auto& m : array_field(j, "markers")) {
      t.markers.push_back({ts_field(m, "t"), direction_field(m, "direction")});
    }
  }
  return t;
}

}  // namespace

Json to_json(const DayWindow& w) {
  return {{"date", format_date(w.date)},
          {"tz_offset_minutes", w.tz_offset_minutes},
          {"start", ts(w.start)},
          {"end", ts(w.end)}};
}

Json to_json(const DayLog& day) {
  Json fixes = Json::array(), images = Json::array(), events = Json::array(),
       coverage = Json::array();
  for (const auto& f : day.fixes) fixes.push_back({{"t", ts(f.t)}, {"lat", f.lat}, {"lon", f.lon}});
  for (const auto& i : day.images) {
    images.push_back({{"t", ts(i.t)}, {"media_id", i.media_id}, {"path", i.path}});
  }
  for (const auto& e : day.events) {
    events.push_back({{"t", ts(e.t)},
                      {"channel", to_string(e.channel)},
                      {"direction", to_string(e.direction)},
                      {"duration_s", e.duration_s}});
  }
  for (const auto& c : day.coverage) coverage.push_back(to_json(c));
  return {{"window", to_json(day.window)},
          {"fixes", fixes},
          {"images", images},
          {"events", events},
          {"coverage", coverage}};
}

DayWindow window_from_json(const Json& j) {
  auto date = parse_date(field<std::string>(j, "date"));
  if (!date) throw FormatError("bad window date");
  DayWindow w;
  w.date = *date;
  w.tz_offset_minutes = field<int>(j, "tz_offset_minutes");
  w.start = ts_field(j, "start");
  w.end = ts_field(j, "end");
  return w;
}

DayLog daylog_from_json(const Json& j) {
  DayLog day;
  day.window = window_from_json(sub(j, "window"));
  for (const auto& f : array_field(j, "fixes")) {
    day.fixes.push_back({ts_field(f, "t"), field<double>(f, "lat"), field<double>(f, "lon")});
  }
  for (const auto& i : array_field(j, "images")) {
    day.images.push_back(
        {ts_field(i, "t"), field<std::string>(i, "media_id"), field<std::string>(i, "path")});
  }
  for (const auto& e : array_field(j, "events")) {
    ContextEvent ev;
    ev.t = ts_field(e, "t");
    if (!parse_context_channel(field<std::string>(e, "channel"), ev.channel)) {
      throw FormatError("bad event channel");
    }
    ev.direction = direction_field(e, "direction");
    ev.duration_s = field<std::int64_t>(e, "duration_s");
    day.events.push_back(ev);
  }
  for (const auto& c : array_field(j, "coverage")) {
    CoverageInterval iv;
    if (!parse_channel(field<std::string>(c, "channel"), iv.channel)) throw FormatError("bad coverage channel");
    iv.start = ts_field(c, "start");
    iv.end = ts_field(c, "end");
    day.coverage.push_back(iv);
  }
  return day;
}

Json to_json(const DayAnalysis& a) {
  Json stays = Json::array(), transitions = Json::array(), places = Json::array();
  for (const auto& sp : a.stay_points) stays.push_back(to_json(sp));
  for (const auto& t : a.transitions) {
    transitions.push_back({{"start", ts(t.start)},
                           {"end", ts(t.end)},
                           {"from_stay", opt_index(t.from_stay)},
                           {"to_stay", opt_index(t.to_stay)},
                           {"from_place", opt_index(t.from_place)},
                           {"to_place", opt_index(t.to_place)}});
  }
  for (const auto& p : a.places) {
    places.push_back({{"centroid_lat", p.centroid_lat},
                      {"centroid_lon", p.centroid_lon},
                      {"total_dwell_s", p.total_dwell_s},
                      {"visits", p.visits}});
  }
  return {{"stay_points", stays}, {"transitions", transitions}, {"places", places}};
}

DayAnalysis analysis_from_json(const Json& j) {
  DayAnalysis a;
  for (const auto& s : array_field(j, "stay_points")) {
    StayPoint sp;
    sp.centroid_lat = field<double>(s, "centroid_lat");
    sp.centroid_lon = field<double>(s, "centroid_lon");
    sp.arrival = ts_field(s, "arrival");
    sp.departure = ts_field(s, "departure");
    auto range = field<std::vector<std::size_t>>(s, "member_range");
    if (range.size() != 2) throw FormatError("member_range must have two entries");
    sp.first = range[0];
    sp.last = range[1];
    a.stay_points.push_back(sp);
  }
  for (const auto& t : array_field(j, "transitions")) {
    a.transitions.push_back({ts_field(t, "start"), ts_field(t, "end"), opt_index_field(t, "from_stay"),
                             opt_index_field(t, "to_stay"), opt_index_field(t, "from_place"),
                             opt_index_field(t, "to_place")});
  }
  for (const auto& p : array_field(j, "places")) {
    a.places.push_back({field<double>(p, "centroid_lat"), field<double>(p, "centroid_lon"),
                        field<double>(p, "total_dwell_s"), field<std::vector<std::size_t>>(p, "visits")});
  }
  return a;
}

Json to_json(const Track& track) {
  Json segments = Json::array();
  for (const auto& s : track.segments) segments.push_back(to_json(s));
  Json out{{"segments", segments}};
  if (track.channel == Channel::sms) {
    Json markers = Json::array();
    for (const auto& m : track.markers) {
      markers.push_back({{"t", ts(m.t)}, {"direction", to_string(m.direction)}});
    }
    out["markers"] = markers;
  }
  return out;
}

Json to_json(const Timeline& tl) {
  Json out{{"window", to_json(tl.window)}};
  for (Channel c : kAllChannels) out[std::string(to_string(c))] = to_json(tl.track(c));
  return out;
}

Timeline timeline_from_json(const Json& j) {
  Timeline tl;
  tl.window = window_from_json(sub(j, "window"));
  tl.visual = track_from_json(sub(j, "visual"), Channel::visual);
  tl.location = track_from_json(sub(j, "location"), Channel::location);
  tl.call = track_from_json(sub(j, "call"), Channel::call);
  tl.sms = track_from_json(sub(j, "sms"), Channel::sms);
  return tl;
}

Json to_json(const WindowData& data) {
  Json frames = Json::array(), fixes = Json::array(), places = Json::array(), events = Json::array();
  for (const auto& i : data.frames) {
    frames.push_back({{"t", ts(i.t)}, {"media_id", i.media_id}, {"path", i.path}});
  }
  for (const auto& f : data.fixes) fixes.push_back({{"t", ts(f.t)}, {"lat", f.lat}, {"lon", f.lon}});
  for (const auto& p : data.places) {
    places.push_back({{"place", p.place},
                      {"centroid_lat", p.centroid_lat},
                      {"centroid_lon", p.centroid_lon},
                      {"window_dwell_s", p.window_dwell_s},
                      {"total_dwell_s", p.total_dwell_s}});
  }
  for (const auto& e : data.events) {
    events.push_back({{"t", ts(e.t)},
                      {"channel", to_string(e.channel)},
                      {"direction", to_string(e.direction)},
                      {"duration_s", e.duration_s}});
  }
  return {{"from", ts(data.selection.from)},
          {"to", ts(data.selection.to)},
          {"frames", frames},
          {"fixes", fixes},
          {"places", places},
          {"events", events}};
}

Json to_json(const Episode& e) {
  return {{"episode_id", e.episode_id},
          {"start", ts(e.start)},
          {"end", ts(e.end)},
          {"activity", e.activity},
          {"notes", e.notes},
          {"affect", e.affect},
          {"created_at", ts(e.created_at)}};
}

Episode episode_from_json(const Json& j) {
  Episode e = episode_request_from_json(j);
  e.episode_id = field<std::string>(j, "episode_id");
  e.created_at = ts_field(j, "created_at");
  return e;
}

Episode episode_request_from_json(const Json& j) {
  Episode e;
  e.start = ts_field(j, "start");
  e.end = ts_field(j, "end");
  e.activity = field<std::string>(j, "activity");
  if (j.contains("notes")) e.notes = field<std::string>(j, "notes");
  if (j.contains("affect")) e.affect = field<std::map<std::string, int>>(j, "affect");
  return e;
}

Json to_json(const GapSummary& g) {
  Json gaps = Json::array();
  for (const auto& [from, to] : g.gaps) gaps.push_back({{"start", ts(from)}, {"end", ts(to)}});
  return {{"count", g.count}, {"total_s", g.total_s}, {"gaps", gaps}};
}

Json to_json(const ReconstructionSession& s) {
  Json episodes = Json::array();
  for (const auto& e : s.episodes()) episodes.push_back(to_json(e));
  return {{"session_id", s.id()},
          {"window", to_json(s.day())},
          {"state", s.finalized() ? "finalized" : "open"},
          {"episodes", episodes}};
}

ReconstructionSession session_from_json(const Json& j) {
  std::vector<Episode> episodes;
  for (const auto& e : array_field(j, "episodes")) episodes.push_back(episode_from_json(e));
  const auto state = field<std::string>(j, "state");
  if (state != "open" && state != "finalized") throw FormatError("bad session state");
  try {
    return ReconstructionSession::restore(field<std::string>(j, "session_id"),
                                          window_from_json(sub(j, "window")), std::move(episodes),
                                          state == "finalized" ? SessionState::finalized
                                                               : SessionState::open);
  } catch (const ReconstructionError& e) {
    throw FormatError(std::string("stored session breaks an invariant: ") + e.what());
  }
}

}  // namespace footprint
