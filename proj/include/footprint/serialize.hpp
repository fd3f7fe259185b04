#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "footprint/geo.hpp"
#include "footprint/model.hpp"
#include "footprint/reconstruction.hpp"
#include "footprint/timeline.hpp"

namespace footprint {

using Json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stable text form used for every persisted document: two-space indent,
/// sorted keys, trailing newline.
std::string canonical_dump(const Json& doc);

Json to_json(const DayWindow& w);
Json to_json(const DayLog& day);
Json to_json(const DayAnalysis& analysis);
Json to_json(const Timeline& timeline);
Json to_json(const Track& track);
Json to_json(const WindowData& data);
Json to_json(const Episode& e);
Json to_json(const ReconstructionSession& session);
Json to_json(const GapSummary& gaps);

// Readers throw FormatError on missing or mistyped fields.
DayWindow window_from_json(const Json& j);
DayLog daylog_from_json(const Json& j);
DayAnalysis analysis_from_json(const Json& j);
Timeline timeline_from_json(const Json& j);
Episode episode_from_json(const Json& j);
ReconstructionSession session_from_json(const Json& j);

/// Parses the body of an append/amend request: start, end, activity, and
/// optional notes and affect. created_at and episode_id are left empty.
Episode episode_request_from_json(const Json& j);

}  // namespace footprint
