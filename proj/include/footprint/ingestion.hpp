#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "footprint/model.hpp"

namespace footprint {

enum class IngestErrorKind {
  missing_header,
  malformed_row,
  conflicting_fix,
  malformed_document,
  invalid_duration,
  duplicate_path,
  empty_interval,
  empty_day,
};

std::string_view to_string(IngestErrorKind kind);

class IngestError : public std::runtime_error {
 public:
  IngestError(IngestErrorKind kind, std::size_t line, const std::string& detail);

  IngestErrorKind kind() const { return kind_; }
  /// 1-based line number (header is line 1); 0 when not line-specific.
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  IngestErrorKind kind_;
  std::size_t line_;
  std::string detail_;
};

std::vector<GpsFix> parse_gps_csv(std::string_view text);

struct GpxResult {
  std::vector<GpsFix> fixes;
  std::vector<std::string> warnings;
};

GpxResult parse_gpx(std::string_view text);

std::vector<ContextEvent> parse_context_csv(std::string_view text);

/// media_id is `<date>#<6-digit sorted position>`.
std::vector<ImageSample> parse_image_manifest(std::string_view text, Date date);

std::vector<CoverageInterval> parse_coverage_csv(std::string_view text);

struct IngestManifest {
  Date date{};
  int tz_offset_minutes = 0;
  std::optional<std::string> gps_path;
  std::optional<std::string> context_path;
  std::optional<std::string> images_path;
  std::optional<std::string> coverage_path;
};

/// Reads the manifest document (`date`, `tz_offset_minutes`, `gps`,
/// `context`, `images`, `coverage`). Throws IngestError(malformed_document).
IngestManifest parse_manifest(std::string_view text);

struct ParsedChannels {
  std::vector<GpsFix> fixes;
  std::vector<ImageSample> images;
  std::vector<ContextEvent> events;
  std::optional<std::vector<CoverageInterval>> coverage;  // nullopt: no coverage file
};

struct AssembledDay {
  DayLog day;
  std::vector<std::string> warnings;
};

/// Builds the DayLog for the manifest's local day. Out-of-window samples are
/// dropped with a warning; channels without coverage rows get [first, last).
/// Throws IngestError(empty_day) when nothing remains.
AssembledDay assemble_day(Date date, int tz_offset_minutes, ParsedChannels channels);

// Writers for the channel formats; parse(write(x)) == x.
std::string write_gps_csv(const std::vector<GpsFix>& fixes);
std::string write_context_csv(const std::vector<ContextEvent>& events);
std::string write_image_manifest(const std::vector<ImageSample>& images);
std::string write_coverage_csv(const std::vector<CoverageInterval>& coverage);

}  // namespace footprint
