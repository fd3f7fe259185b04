#include "footprint/service.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <shared_mutex>

#include <httplib.h>

#include "footprint/serialize.hpp"

namespace footprint {

namespace {

constexpr double kCircleMinPx = 6.0;
constexpr double kCircleMaxPx = 40.0;
constexpr const char* kDatePattern = R"((\d{4}-\d{2}-\d{2}))";
constexpr const char* kSessionPattern = R"((s\d{1,31}))";

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string content_type_for(const std::string& file_name) {
  const auto ext = fs::path(file_name).extension().string();
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

int status_for(ReconstructionErrorKind kind) {
  switch (kind) {
    case ReconstructionErrorKind::chronology_violation:
    case ReconstructionErrorKind::session_finalized:
    case ReconstructionErrorKind::empty_session: return 409;
    case ReconstructionErrorKind::out_of_day:
    case ReconstructionErrorKind::invalid_episode: return 400;
  }
  return 400;
}

bool truthy(const std::string& v) { return !v.empty() && v != "0" && v != "false"; }

/// Parsed, read-only view of one ingested day.
struct DayView {
  DayLog day;
  DayAnalysis analysis;
  std::string timeline;
  std::string timeline_etag;
  std::map<std::string, std::size_t, std::less<>> image_by_media_id;
};

}  // namespace

std::pair<std::string, int> parse_bind_address(const std::string& addr) {
  std::string host = "127.0.0.1";
  std::string port_text = addr;
  if (auto colon = addr.rfind(':'); colon != std::string::npos) {
    host = addr.substr(0, colon);
    port_text = addr.substr(colon + 1);
  }
  if (host.empty() || port_text.empty() ||
      !std::all_of(port_text.begin(), port_text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw std::invalid_argument("bind address must look like host:port");
  }
  const int port = std::stoi(port_text);
  if (port > 65535) throw std::invalid_argument("port out of range");
  return {host, port};
}

struct Service::Impl {
  Store& store;
  AnalysisConfig config;
  Clock clock;
  httplib::Server http;

  std::mutex locks_mutex;
  std::map<Date, std::shared_ptr<std::shared_mutex>> day_locks;
  std::map<std::string, std::shared_ptr<std::mutex>> session_locks;

  std::mutex cache_mutex;
  std::map<Date, std::shared_ptr<const DayView>> cache;

  Impl(Store& s, AnalysisConfig c, Clock clk) : store(s), config(c), clock(std::move(clk)) {
    if (!clock) {
      clock = [] { return std::chrono::floor<Millis>(std::chrono::system_clock::now()); };
    }
    routes();
  }

  std::shared_ptr<std::shared_mutex> day_lock(Date d) {
    std::lock_guard lk(locks_mutex);
    auto& m = day_locks[d];
    if (!m) m = std::make_shared<std::shared_mutex>();
    return m;
  }

  std::shared_ptr<std::mutex> session_lock(Date d, const std::string& id) {
    std::lock_guard lk(locks_mutex);
    auto& m = session_locks[format_date(d) + "/" + id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  /// Caller holds the day lock (shared or exclusive).
  std::shared_ptr<const DayView> view(Date d) {
    {
      std::lock_guard lk(cache_mutex);
      if (auto it = cache.find(d); it != cache.end()) return it->second;
    }
    if (!store.has_day(d)) return nullptr;
    auto v = std::make_shared<DayView>();
    v->day = daylog_from_json(Json::parse(*store.read_document(d, kDayLogDoc)));
    v->analysis = analysis_from_json(Json::parse(*store.read_document(d, kAnalysisDoc)));
    v->timeline = *store.read_document(d, kTimelineDoc);
    v->timeline_etag = "\"" + sha256_hex(v->timeline) + "\"";
    for (std::size_t i = 0; i < v->day.images.size(); ++i) v->image_by_media_id[v->day.images[i].media_id] = i;
    std::lock_guard lk(cache_mutex);
    cache[d] = v;
    return v;
  }

  void invalidate(Date d) {
    std::lock_guard lk(cache_mutex);
    cache.erase(d);
  }

  static std::optional<Date> date_param(const httplib::Request& req, std::size_t index = 1) {
    return parse_date(req.matches[index].str());
  }

  void routes();
  void ingest(const httplib::Request& req, httplib::Response& res);
  void window(const httplib::Request& req, httplib::Response& res);
  void media(const httplib::Request& req, httplib::Response& res);
  void create_session(const httplib::Request& req, httplib::Response& res);
  void mutate_session(const httplib::Request& req, httplib::Response& res,
                      const std::function<Json(ReconstructionSession&)>& op, int success_status);
};

void Service::Impl::routes() {
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    } catch (...) {
      send_error(res, 500, "InternalError", "unknown error");
    }
  });

  const std::string day = std::string("/api/days/") + kDatePattern;
  const std::string session = day + "/sessions/" + kSessionPattern;

  http.Get("/api/days", [this](const httplib::Request&, httplib::Response& res) {
    Json days = Json::array();
    for (Date d : store.days()) days.push_back(format_date(d));
    send_json(res, 200, {{"days", days}});
  });

  http.Post(day, [this](const httplib::Request& req, httplib::Response& res) { ingest(req, res); });

  http.Get(day, [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d) return send_error(res, 404, "UnknownDay", "no such day");
    auto lock = day_lock(*d);
    std::shared_lock guard(*lock);
    auto v = view(*d);
    if (!v) return send_error(res, 404, "UnknownDay", "day " + req.matches[1].str() + " is not ingested");
    Json sessions = Json::array();
    for (const auto& id : store.session_ids(*d)) sessions.push_back(id);
    send_json(res, 200,
              {{"date", format_date(*d)},
               {"window", to_json(v->day.window)},
               {"fixes", v->day.fixes.size()},
               {"images", v->day.images.size()},
               {"events", v->day.events.size()},
               {"stay_points", v->analysis.stay_points.size()},
               {"transitions", v->analysis.transitions.size()},
               {"places", v->analysis.places.size()},
               {"sessions", sessions}});
  });

  http.Get(day + "/timeline", [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d) return send_error(res, 404, "UnknownDay", "no such day");
    auto lock = day_lock(*d);
    std::shared_lock guard(*lock);
    auto v = view(*d);
    if (!v) return send_error(res, 404, "UnknownDay", "day " + req.matches[1].str() + " is not ingested");
    res.set_header("ETag", v->timeline_etag);
    res.set_header("Cache-Control", "no-cache");
    if (req.get_header_value("If-None-Match") == v->timeline_etag) {
      res.status = 304;
      return;
    }
    res.status = 200;
    res.set_content(v->timeline, "application/json");
  });

  http.Get(day + "/analysis", [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d) return send_error(res, 404, "UnknownDay", "no such day");
    auto lock = day_lock(*d);
    std::shared_lock guard(*lock);
    auto doc = store.read_document(*d, kAnalysisDoc);
    if (!doc) return send_error(res, 404, "UnknownDay", "day " + req.matches[1].str() + " is not ingested");
    res.status = 200;
    res.set_content(*doc, "application/json");
  });

  http.Get(day + "/window", [this](const httplib::Request& req, httplib::Response& res) { window(req, res); });

  http.Get(std::string("/api/media/") + kDatePattern + "/(.+)",
           [this](const httplib::Request& req, httplib::Response& res) { media(req, res); });

  http.Get(day + "/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d || !store.has_day(*d)) return send_error(res, 404, "UnknownDay", "no such day");
    Json ids = Json::array();
    for (const auto& id : store.session_ids(*d)) ids.push_back(id);
    send_json(res, 200, {{"sessions", ids}});
  });

  http.Post(day + "/sessions",
            [this](const httplib::Request& req, httplib::Response& res) { create_session(req, res); });

  http.Get(session, [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d) return send_error(res, 404, "UnknownDay", "no such day");
    auto lock = day_lock(*d);
    std::shared_lock guard(*lock);
    auto s = store.load_session(*d, req.matches[2].str());
    if (!s) return send_error(res, 404, "UnknownSession", "no such session");
    Json body = to_json(*s);
    body["gaps"] = to_json(s->gap_summary());
    send_json(res, 200, body);
  });

  http.Post(session + "/episodes", [this](const httplib::Request& req, httplib::Response& res) {
    mutate_session(req, res,
                   [&](ReconstructionSession& s) {
                     Episode e = episode_request_from_json(Json::parse(req.body));
                     e.created_at = clock();
                     return to_json(s.append_episode(std::move(e)));
                   },
                   201);
  });

  http.Put(session + "/episodes/last", [this](const httplib::Request& req, httplib::Response& res) {
    mutate_session(req, res,
                   [&](ReconstructionSession& s) {
                     Episode e = episode_request_from_json(Json::parse(req.body));
                     e.created_at = clock();
                     return to_json(s.amend_last_episode(std::move(e)));
                   },
                   200);
  });

  http.Post(session + "/finalize", [this](const httplib::Request& req, httplib::Response& res) {
    mutate_session(req, res, [](ReconstructionSession& s) { return to_json(s.finalize()); }, 200);
  });

  http.Get(session + "/export", [this](const httplib::Request& req, httplib::Response& res) {
    auto d = date_param(req);
    if (!d) return send_error(res, 404, "UnknownDay", "no such day");
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
    if (format != "csv" && format != "json") {
      return send_error(res, 400, "InvalidFormat", "format must be csv or json");
    }
    auto lock = day_lock(*d);
    std::shared_lock guard(*lock);
    auto s = store.load_session(*d, req.matches[2].str());
    if (!s) return send_error(res, 404, "UnknownSession", "no such session");
    res.status = 200;
    if (format == "csv") {
      res.set_content(export_episodes(*s, ExportFormat::csv), "text/csv");
    } else {
      res.set_content(export_episodes(*s, ExportFormat::json), "application/json");
    }
  });
}

void Service::Impl::ingest(const httplib::Request& req, httplib::Response& res) {
  auto d = date_param(req);
  if (!d) return send_error(res, 400, "InvalidDate", "not a calendar date: " + req.matches[1].str());

  IngestInput input;
  input.date = *d;
  bool force = req.has_param("force") && truthy(req.get_param_value("force"));
  try {
    if (req.is_multipart_form_data()) {
      if (req.has_file("manifest")) {
        auto m = Json::parse(req.get_file_value("manifest").content);
        input.tz_offset_minutes = m.value("tz_offset_minutes", 0);
        force = force || m.value("force", false);
        input.gps_is_gpx = m.value("gps_format", std::string("csv")) == "gpx";
      }
      auto part = [&](const char* name) -> std::optional<std::string> {
        if (!req.has_file(name)) return std::nullopt;
        return req.get_file_value(name).content;
      };
      input.gps = part("gps");
      if (req.has_file("gps") && req.get_file_value("gps").filename.ends_with(".gpx")) input.gps_is_gpx = true;
      input.context = part("context");
      input.images = part("images");
      input.coverage = part("coverage");
      auto uploads = std::make_shared<std::map<std::string, std::string>>();
      for (const auto& f : req.get_file_values("media")) (*uploads)[f.filename] = f.content;
      input.media = [uploads](const std::string& path) -> std::optional<std::string> {
        auto it = uploads->find(path);
        if (it == uploads->end()) return std::nullopt;
        return it->second;
      };
    } else {
      auto body = Json::parse(req.body);
      if (!body.is_object()) return send_error(res, 400, "BadRequest", "expected a JSON object");
      input.tz_offset_minutes = body.value("tz_offset_minutes", 0);
      force = force || body.value("force", false);
      input.gps_is_gpx = body.value("gps_format", std::string("csv")) == "gpx";
      auto text = [&](const char* key) -> std::optional<std::string> {
        if (!body.contains(key) || body[key].is_null()) return std::nullopt;
        return body[key].get<std::string>();
      };
      input.gps = text("gps");
      input.context = text("context");
      input.images = text("images");
      input.coverage = text("coverage");
    }
  } catch (const Json::exception& e) {
    return send_error(res, 400, "BadRequest", e.what());
  }
  if (!input.gps && !input.context && !input.images && !input.coverage) {
    return send_error(res, 400, "BadRequest", "no channel payloads");
  }

  auto lock = day_lock(*d);
  std::unique_lock guard(*lock);
  try {
    IngestSummary summary = ingest_day(store, input, config, force);
    invalidate(*d);
    send_json(res, 201, to_json(summary));
  } catch (const AlreadyIngested& e) {
    send_error(res, 409, "AlreadyIngested", e.what());
  } catch (const ParseFailure& e) {
    Json errors = Json::array();
    for (const auto& [channel, err] : e.errors()) {
      errors.push_back({{"channel", channel},
                        {"kind", to_string(err.kind())},
                        {"line", err.line()},
                        {"detail", err.detail()}});
    }
    send_json(res, 422, {{"error", "ParseError"}, {"message", e.what()}, {"errors", errors}});
  } catch (const IngestError& e) {
    send_error(res, 422, to_string(e.kind()), e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, "BadRequest", e.what());
  }
}

void Service::Impl::window(const httplib::Request& req, httplib::Response& res) {
  auto d = date_param(req);
  if (!d) return send_error(res, 404, "UnknownDay", "no such day");
  auto lock = day_lock(*d);
  std::shared_lock guard(*lock);
  auto v = view(*d);
  if (!v) return send_error(res, 404, "UnknownDay", "day " + req.matches[1].str() + " is not ingested");

  auto from = parse_timestamp(req.get_param_value("from"));
  auto to = parse_timestamp(req.get_param_value("to"));
  if (!from || !to) return send_error(res, 400, "InvalidWindow", "from and to must be ISO-8601 timestamps");

  WindowData data;
  try {
    data = select_window(v->day, v->analysis, {*from, *to});
  } catch (const InvalidWindow& e) {
    return send_error(res, 400, "InvalidWindow", e.what());
  }

  Json body = to_json(data);
  double max_dwell = 0.0;
  for (const auto& p : data.places) max_dwell = std::max(max_dwell, p.window_dwell_s);
  for (std::size_t i = 0; i < data.places.size(); ++i) {
    body["places"][i]["circle_radius_px"] =
        circle_radius_px(data.places[i].window_dwell_s, max_dwell, kCircleMinPx, kCircleMaxPx);
  }
  Json sequence = Json::array();
  for (const auto& f : frame_sequence(data)) {
    sequence.push_back({{"media_id", f.media_id},
                        {"t", format_timestamp(f.t)},
                        {"suggested_display_ms", f.suggested_display_ms}});
  }
  body["sequence"] = sequence;
  send_json(res, 200, body);
}

void Service::Impl::media(const httplib::Request& req, httplib::Response& res) {
  auto d = date_param(req);
  if (!d) return send_error(res, 404, "UnknownMedia", "no such media");
  auto lock = day_lock(*d);
  std::shared_lock guard(*lock);
  auto v = view(*d);
  if (!v) return send_error(res, 404, "UnknownMedia", "no such media");
  auto it = v->image_by_media_id.find(req.matches[2].str());
  if (it == v->image_by_media_id.end()) return send_error(res, 404, "UnknownMedia", "no such media");
  const std::string file_name = media_file_name(v->day.images[it->second]);
  auto path = store.media_file(*d, file_name);
  if (!path) return send_error(res, 404, "UnknownMedia", "media was not uploaded");

  std::string bytes = read_file(*path);
  const std::string etag = "\"" + sha256_hex(bytes) + "\"";
  res.set_header("ETag", etag);
  res.set_header("Cache-Control", "public, max-age=31536000, immutable");
  if (req.get_header_value("If-None-Match") == etag) {
    res.status = 304;
    return;
  }
  res.status = 200;
  res.set_content(std::move(bytes), content_type_for(file_name));
}

void Service::Impl::create_session(const httplib::Request& req, httplib::Response& res) {
  auto d = date_param(req);
  if (!d) return send_error(res, 404, "UnknownDay", "no such day");
  auto lock = day_lock(*d);
  std::shared_lock guard(*lock);
  auto v = view(*d);
  if (!v) return send_error(res, 404, "UnknownDay", "day " + req.matches[1].str() + " is not ingested");

  auto creation = session_lock(*d, "");
  std::lock_guard create_guard(*creation);
  unsigned long next = 1;
  for (const auto& id : store.session_ids(*d)) next = std::max(next, std::stoul(id.substr(1)) + 1);
  char id[32];
  std::snprintf(id, sizeof id, "s%04lu", next);
  ReconstructionSession s(id, v->day.window);
  store.save_session(*d, s);
  Json body = to_json(s);
  body["gaps"] = to_json(s.gap_summary());
  send_json(res, 201, body);
}

void Service::Impl::mutate_session(const httplib::Request& req, httplib::Response& res,
                                   const std::function<Json(ReconstructionSession&)>& op,
                                   int success_status) {
  auto d = date_param(req);
  if (!d) return send_error(res, 404, "UnknownDay", "no such day");
  const std::string id = req.matches[2].str();
  auto lock = day_lock(*d);
  std::shared_lock guard(*lock);
  auto writer = session_lock(*d, id);
  std::lock_guard write_guard(*writer);

  auto s = store.load_session(*d, id);
  if (!s) return send_error(res, 404, "UnknownSession", "no such session");
  Json result;
  try {
    result = op(*s);
  } catch (const ReconstructionError& e) {
    return send_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const FormatError& e) {
    return send_error(res, 400, "BadRequest", e.what());
  } catch (const Json::exception& e) {
    return send_error(res, 400, "BadRequest", e.what());
  }
  store.save_session(*d, *s);
  Json body{{"result", result}, {"session", to_json(*s)}, {"gaps", to_json(s->gap_summary())}};
  send_json(res, success_status, body);
}

Service::Service(Store& store, AnalysisConfig config, Clock clock)
    : impl_(std::make_unique<Impl>(store, config, std::move(clock))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Service::run() { return impl_->http.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->http.stop();
}

void Service::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace footprint
