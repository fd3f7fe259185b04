// footprint: ingest lifelog days, inspect them, serve the review API, and
// export reconstruction sessions.
//
// Exit codes: 0 ok, 1 usage or other failure, 2 parse error or unreadable
// input, 3 empty day, 4 unknown day or session, 5 bind failure,
// 6 write failure.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "footprint/pipeline.hpp"
#include "footprint/serialize.hpp"
#include "footprint/service.hpp"
#include "footprint/store.hpp"
#include "footprint/summary.hpp"

namespace {

using namespace footprint;

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kEmptyDay = 3,
  kUnknown = 4,
  kBindFailure = 5,
  kWriteFailure = 6,
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

struct Overrides {
  std::optional<double> radius_m, min_dwell_s, merge_radius_m, visual_gap_s;

  AnalysisConfig apply(AnalysisConfig c) const {
    if (radius_m) c.geo.radius_m = *radius_m;
    if (min_dwell_s) c.geo.min_dwell_s = *min_dwell_s;
    if (merge_radius_m) c.geo.merge_radius_m = *merge_radius_m;
    if (visual_gap_s) c.timeline.visual_gap_s = *visual_gap_s;
    return c;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--radius-m", o.radius_m, "stay-point radius in meters (RADIUS_M)");
  cmd->add_option("--min-dwell-s", o.min_dwell_s, "minimum dwell in seconds (MIN_DWELL_S)");
  cmd->add_option("--merge-radius-m", o.merge_radius_m, "place merge radius (MERGE_RADIUS_M)");
  cmd->add_option("--visual-gap-s", o.visual_gap_s, "visual presence gap (VISUAL_GAP_S)");
}

std::optional<Date> date_arg(const std::string& text) {
  auto d = parse_date(text);
  if (!d) std::cerr << "error: not a date: " << text << "\n";
  return d;
}

int cmd_ingest(const std::string& manifest, const std::string& store_root, bool force,
               const Overrides& overrides) {
  IngestInput input;
  try {
    input = load_manifest_input(manifest);
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
  try {
    Store store(store_root);
    const auto summary = ingest_day(store, input, overrides.apply(analysis_config_from_env()), force);
    std::printf("ingested %s\n", format_date(summary.date).c_str());
    std::printf("  %-12s %zu\n", "fixes", summary.fixes);
    std::printf("  %-12s %zu\n", "images", summary.images);
    std::printf("  %-12s %zu\n", "events", summary.events);
    std::printf("  %-12s %zu\n", "stay points", summary.stay_points);
    std::printf("  %-12s %zu\n", "transitions", summary.transitions);
    std::printf("  %-12s %zu\n", "places", summary.places);
    std::printf("  %-12s %zu\n", "warnings", summary.warnings.size());
    for (const auto& w : summary.warnings) std::printf("    - %s\n", w.c_str());
    return kOk;
  } catch (const ParseFailure& e) {
    for (const auto& [channel, err] : e.errors()) std::cerr << "error: " << channel << ": " << err.what() << "\n";
    return kParseError;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == IngestErrorKind::empty_day ? kEmptyDay : kParseError;
  } catch (const AlreadyIngested& e) {
    std::cerr << "error: " << e.what() << " (use --force to replace)\n";
    return kFailure;
  } catch (const StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kWriteFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_summarize(const std::string& date_text, const std::string& store_root) {
  auto date = date_arg(date_text);
  if (!date) return kUnknown;
  Store store(store_root);
  if (!store.has_day(*date)) {
    std::cerr << "error: day " << date_text << " is not ingested\n";
    return kUnknown;
  }
  try {
    auto day = daylog_from_json(Json::parse(*store.read_document(*date, kDayLogDoc)));
    auto analysis = analysis_from_json(Json::parse(*store.read_document(*date, kAnalysisDoc)));
    auto timeline = timeline_from_json(Json::parse(*store.read_document(*date, kTimelineDoc)));
    std::cout << render_summary(day, analysis, timeline);
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_serve(const std::string& store_root, const std::string& bind_addr, const Overrides& overrides) {
  std::pair<std::string, int> addr;
  try {
    addr = parse_bind_address(bind_addr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBindFailure;
  }

  // Block termination signals in every thread; one thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Store store(store_root);
  Service service(store, overrides.apply(analysis_config_from_env()));
  const int port = service.bind(addr.first, addr.second);
  if (port < 0) {
    std::cerr << "error: cannot bind " << bind_addr << "\n";
    return kBindFailure;
  }
  std::printf("listening on http://%s:%d\n", addr.first.c_str(), port);
  std::fflush(stdout);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  const bool ok = service.run();
  if (!ok) {
    waiter.detach();
    return kBindFailure;
  }
  waiter.join();
  return kOk;
}

int cmd_export(const std::string& date_text, const std::string& session_id, const std::string& format,
               const std::string& out_path, const std::string& store_root) {
  auto date = date_arg(date_text);
  if (!date) return kUnknown;
  Store store(store_root);
  if (!store.has_day(*date)) {
    std::cerr << "error: day " << date_text << " is not ingested\n";
    return kUnknown;
  }
  auto session = store.load_session(*date, session_id);
  if (!session) {
    std::cerr << "error: no session " << session_id << " for " << date_text << "\n";
    return kUnknown;
  }
  const auto text = export_episodes(*session, format == "json" ? ExportFormat::json : ExportFormat::csv);
  try {
    atomic_write(out_path, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kWriteFailure;
  }
  return kOk;
}

int cmd_verify(const std::string& store_root) {
  Store store(store_root);
  const auto problems = verify_store(store_root);
  for (const auto& p : problems) std::cout << p << "\n";
  if (problems.empty()) std::cout << "store ok\n";
  return problems.empty() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"footprint: lifelog review and day reconstruction"};
  app.require_subcommand(1);

  std::string store_root = env_or("STORE_ROOT", "footprint-store");
  std::string manifest, date, session, format = "csv", out, bind = env_or("BIND_ADDR", "127.0.0.1:8080");
  bool force = false;
  Overrides overrides;

  auto* ingest = app.add_subcommand("ingest", "ingest a day from a manifest");
  ingest->add_option("--manifest", manifest, "manifest file")->required();
  ingest->add_option("--store", store_root, "store root (STORE_ROOT)");
  ingest->add_flag("--force", force, "replace an already ingested day");
  add_overrides(ingest, overrides);

  auto* summarize = app.add_subcommand("summarize", "print a text report of an ingested day");
  summarize->add_option("--date", date, "YYYY-MM-DD")->required();
  summarize->add_option("--store", store_root, "store root (STORE_ROOT)");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--store", store_root, "store root (STORE_ROOT)");
  serve->add_option("--bind", bind, "host:port, port 0 picks one (BIND_ADDR)");
  add_overrides(serve, overrides);

  auto* exp = app.add_subcommand("export", "export a reconstruction session");
  exp->add_option("--date", date, "YYYY-MM-DD")->required();
  exp->add_option("--session", session, "session id")->required();
  exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("--out", out, "output file")->required();
  exp->add_option("--store", store_root, "store root (STORE_ROOT)");

  auto* verify = app.add_subcommand("verify", "check every persisted document");
  verify->add_option("--store", store_root, "store root (STORE_ROOT)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  if (*ingest) return cmd_ingest(manifest, store_root, force, overrides);
  if (*summarize) return cmd_summarize(date, store_root);
  if (*serve) return cmd_serve(store_root, bind, overrides);
  if (*exp) return cmd_export(date, session, format, out, store_root);
  if (*verify) return cmd_verify(store_root);
  return kFailure;
}
