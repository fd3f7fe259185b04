#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "footprint/geo.hpp"
#include "footprint/ingestion.hpp"
#include "footprint/serialize.hpp"
#include "footprint/store.hpp"
#include "footprint/timeline.hpp"

namespace footprint {

struct AnalysisConfig {
  GeoParams geo;
  TimelineParams timeline;
};

/// Overrides defaults from RADIUS_M, MIN_DWELL_S, VISUAL_GAP_S, MERGE_RADIUS_M.
AnalysisConfig analysis_config_from_env();

/// Raw channel payloads for one day, as read from disk or an upload.
struct IngestInput {
  Date date{};
  int tz_offset_minutes = 0;
  std::optional<std::string> gps;
  bool gps_is_gpx = false;
  std::optional<std::string> context;
  std::optional<std::string> images;
  std::optional<std::string> coverage;
  /// Returns the bytes of an image referenced by the image manifest.
  std::function<std::optional<std::string>(const std::string& path)> media;
};

/// Every channel that failed to parse, so a caller can report them all.
class ParseFailure : public std::runtime_error {
 public:
  explicit ParseFailure(std::vector<std::pair<std::string, IngestError>> errors);
  const std::vector<std::pair<std::string, IngestError>>& errors() const { return errors_; }

 private:
  std::vector<std::pair<std::string, IngestError>> errors_;
};

struct IngestSummary {
  Date date{};
  std::size_t fixes = 0;
  std::size_t images = 0;
  std::size_t events = 0;
  std::size_t stay_points = 0;
  std::size_t transitions = 0;
  std::size_t places = 0;
  std::vector<std::string> warnings;
};

struct ProcessedDay {
  DayLog day;
  DayAnalysis analysis;
  Timeline timeline;
  DayArtifacts artifacts;
  IngestSummary summary;
};

/// Parse, assemble, analyze and compile without touching the store.
/// Throws ParseFailure, or IngestError(empty_day).
ProcessedDay process_day(const IngestInput& input, const AnalysisConfig& config);

/// process_day followed by Store::publish_day.
IngestSummary ingest_day(Store& store, const IngestInput& input, const AnalysisConfig& config,
                         bool replace);

/// Loads a manifest file and the channel files it names (relative to the
/// manifest's directory). Image paths resolve relative to the image manifest.
/// Throws IngestError(malformed_document) for unreadable files.
IngestInput load_manifest_input(const fs::path& manifest_path);

/// Name under media/ for an image: the media_id's index plus the source extension.
std::string media_file_name(const ImageSample& image);

Json to_json(const IngestSummary& s);

}  // namespace footprint
