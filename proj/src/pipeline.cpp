#include "footprint/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "footprint/serialize.hpp"

namespace footprint {

namespace {

std::string join_errors(const std::vector<std::pair<std::string, IngestError>>& errors) {
  std::string s = "parse failed";
  for (const auto& [channel, e] : errors) s += "; " + channel + ": " + e.what();
  return s;
}

double env_double(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  double d = std::strtod(v, &end);
  if (end == v || *end != '\0') throw std::invalid_argument(std::string(name) + " is not a number");
  return d;
}

Json params_json(const AnalysisConfig& c) {
  return {{"radius_m", c.geo.radius_m},
          {"min_dwell_s", c.geo.min_dwell_s},
          {"earth_radius_m", c.geo.earth_radius_m},
          {"merge_radius_m", c.geo.merge_radius_m},
          {"visual_gap_s", c.timeline.visual_gap_s}};
}

}  // namespace

ParseFailure::ParseFailure(std::vector<std::pair<std::string, IngestError>> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

AnalysisConfig analysis_config_from_env() {
  AnalysisConfig c;
  c.geo.radius_m = env_double("RADIUS_M", c.geo.radius_m);
  c.geo.min_dwell_s = env_double("MIN_DWELL_S", c.geo.min_dwell_s);
  c.geo.merge_radius_m = env_double("MERGE_RADIUS_M", c.geo.merge_radius_m);
  c.timeline.visual_gap_s = env_double("VISUAL_GAP_S", c.timeline.visual_gap_s);
  return c;
}

std::string media_file_name(const ImageSample& image) {
  std::string name = image.media_id.substr(image.media_id.find('#') + 1);
  std::string ext = fs::path(image.path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const bool plain = ext.size() >= 2 && ext.size() <= 6 &&
                     std::all_of(ext.begin() + 1, ext.end(), [](unsigned char c) { return std::isalnum(c); });
  return plain ? name + ext : name;
}

ProcessedDay process_day(const IngestInput& input, const AnalysisConfig& config) {
  config.geo.check();
  if (!(config.timeline.visual_gap_s > 0)) throw std::invalid_argument("visual_gap_s must be positive");

  std::vector<std::pair<std::string, IngestError>> errors;
  ParsedChannels channels;
  std::vector<std::string> parse_warnings;
  auto attempt = [&](const char* channel, auto&& fn) {
    try {
      fn();
    } catch (const IngestError& e) {
      errors.emplace_back(channel, e);
    }
  };

  if (input.gps) {
    attempt("gps", [&] {
      if (input.gps_is_gpx) {
        auto gpx = parse_gpx(*input.gps);
        channels.fixes = std::move(gpx.fixes);
        parse_warnings = std::move(gpx.warnings);
      } else {
        channels.fixes = parse_gps_csv(*input.gps);
      }
    });
  }
  if (input.context) attempt("context", [&] { channels.events = parse_context_csv(*input.context); });
  if (input.images) {
    attempt("images", [&] { channels.images = parse_image_manifest(*input.images, input.date); });
  }
  if (input.coverage) attempt("coverage", [&] { channels.coverage = parse_coverage_csv(*input.coverage); });
  if (!errors.empty()) throw ParseFailure(std::move(errors));

  ProcessedDay out;
  auto assembled = assemble_day(input.date, input.tz_offset_minutes, std::move(channels));
  out.day = std::move(assembled.day);
  out.analysis = analyze_day(out.day, config.geo);
  out.timeline = compile_timeline(out.day, out.analysis, config.timeline);

  auto& warnings = out.summary.warnings;
  warnings = std::move(parse_warnings);
  warnings.insert(warnings.end(), assembled.warnings.begin(), assembled.warnings.end());

  for (const auto& img : out.day.images) {
    std::optional<std::string> bytes;
    if (input.media) bytes = input.media(img.path);
    if (!bytes) {
      warnings.push_back("no media for " + img.path);
      continue;
    }
    out.artifacts.media[media_file_name(img)] = std::move(*bytes);
  }

  Json analysis_doc = to_json(out.analysis);
  analysis_doc["params"] = params_json(config);
  out.artifacts.documents[std::string(kDayLogDoc)] = canonical_dump(to_json(out.day));
  out.artifacts.documents[std::string(kAnalysisDoc)] = canonical_dump(analysis_doc);
  out.artifacts.documents[std::string(kTimelineDoc)] = canonical_dump(to_json(out.timeline));

  auto& s = out.summary;
  s.date = input.date;
  s.fixes = out.day.fixes.size();
  s.images = out.day.images.size();
  s.events = out.day.events.size();
  s.stay_points = out.analysis.stay_points.size();
  s.transitions = out.analysis.transitions.size();
  s.places = out.analysis.places.size();
  return out;
}

IngestSummary ingest_day(Store& store, const IngestInput& input, const AnalysisConfig& config,
                         bool replace) {
  if (store.has_day(input.date) && !replace) {
    throw AlreadyIngested("day " + format_date(input.date) + " is already ingested");
  }
  ProcessedDay processed = process_day(input, config);
  store.publish_day(input.date, processed.artifacts, replace);
  return processed.summary;
}

IngestInput load_manifest_input(const fs::path& manifest_path) {
  auto unreadable = [](const fs::path& p) {
    return IngestError(IngestErrorKind::malformed_document, 0, "cannot read " + p.string());
  };
  std::string manifest_text;
  try {
    manifest_text = read_file(manifest_path);
  } catch (const StoreError&) {
    throw unreadable(manifest_path);
  }
  const IngestManifest m = parse_manifest(manifest_text);
  const fs::path base = manifest_path.parent_path();

  auto load = [&](const std::optional<std::string>& rel) -> std::optional<std::string> {
    if (!rel) return std::nullopt;
    const fs::path p = base / *rel;
    try {
      return read_file(p);
    } catch (const StoreError&) {
      throw unreadable(p);
    }
  };

  IngestInput in;
  in.date = m.date;
  in.tz_offset_minutes = m.tz_offset_minutes;
  in.gps = load(m.gps_path);
  in.gps_is_gpx = m.gps_path && fs::path(*m.gps_path).extension() == ".gpx";
  in.context = load(m.context_path);
  in.images = load(m.images_path);
  in.coverage = load(m.coverage_path);
  if (m.images_path) {
    const fs::path image_dir = (base / *m.images_path).parent_path();
    in.media = [image_dir](const std::string& path) -> std::optional<std::string> {
      const fs::path p = image_dir / path;
      if (!fs::is_regular_file(p)) return std::nullopt;
      return read_file(p);
    };
  }
  return in;
}

Json to_json(const IngestSummary& s) {
  return {{"date", format_date(s.date)},
          {"fixes", s.fixes},
          {"images", s.images},
          {"events", s.events},
          {"stay_points", s.stay_points},
          {"transitions", s.transitions},
          {"places", s.places},
          {"warnings", s.warnings}};
}

}  // namespace footprint
