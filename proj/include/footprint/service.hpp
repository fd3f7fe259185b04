#pragma once

#include <functional>
#include <memory>
#include <string>

#include "footprint/pipeline.hpp"
#include "footprint/store.hpp"

namespace footprint {

/// HTTP facade over the store. Routes:
///   GET  /api/days
///   POST /api/days/{date}[?force=1]              ingest (multipart or JSON)
///   GET  /api/days/{date}
///   GET  /api/days/{date}/timeline               ETag / If-None-Match
///   GET  /api/days/{date}/analysis
///   GET  /api/days/{date}/window?from=&to=
///   GET  /api/media/{date}/{media_id}
///   GET  /api/days/{date}/sessions
///   POST /api/days/{date}/sessions
///   GET  /api/days/{date}/sessions/{id}
///   POST /api/days/{date}/sessions/{id}/episodes
///   PUT  /api/days/{date}/sessions/{id}/episodes/last
///   POST /api/days/{date}/sessions/{id}/finalize
///   GET  /api/days/{date}/sessions/{id}/export?format=csv|json
///
/// Mutations are persisted before the response is written. Ingestion holds
/// the day exclusively; session writes are serialized per session.
class Service {
 public:
  using Clock = std::function<Timestamp()>;

  Service(Store& store, AnalysisConfig config, Clock clock = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Returns false if the listener failed.
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port"; a bare port binds 127.0.0.1. Throws std::invalid_argument.
std::pair<std::string, int> parse_bind_address(const std::string& addr);

}  // namespace footprint
