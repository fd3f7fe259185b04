#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "footprint/model.hpp"

namespace footprint {

struct GeoParams {
  double radius_m = 50.0;       // significant-location radius
  double min_dwell_s = 300.0;   // dwell must strictly exceed this
  double earth_radius_m = 6371000.0;
  double merge_radius_m = 50.0;

  /// Throws std::invalid_argument unless every field is strictly positive.
  void check() const;
};

/// A dwell episode: fixes [first, last] all within radius_m of fixes[first].
struct StayPoint {
  double centroid_lat = 0.0;
  double centroid_lon = 0.0;
  Timestamp arrival{};
  Timestamp departure{};
  std::size_t first = 0;  // member_range, inclusive
  std::size_t last = 0;

  Millis dwell() const { return departure - arrival; }
  bool operator==(const StayPoint&) const = default;
};

struct Transition {
  Timestamp start{};
  Timestamp end{};
  std::optional<std::size_t> from_stay;  // index into the stay point list
  std::optional<std::size_t> to_stay;
  std::optional<std::size_t> from_place;  // filled by link_places
  std::optional<std::size_t> to_place;
  bool operator==(const Transition&) const = default;
};

struct Place {
  double centroid_lat = 0.0;
  double centroid_lon = 0.0;
  double total_dwell_s = 0.0;
  std::vector<std::size_t> visits;  // stay point indices, ascending
  bool operator==(const Place&) const = default;
};

/// Everything the location channel contributes to a day.
struct DayAnalysis {
  std::vector<StayPoint> stay_points;
  std::vector<Transition> transitions;
  std::vector<Place> places;
  bool operator==(const DayAnalysis&) const = default;
};

class UnsortedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Great-circle distance in meters on a sphere (haversine formula).
double haversine_m(LatLon a, LatLon b, double earth_radius_m = 6371000.0);

/// Anchor-sweep stay-point detection. Throws UnsortedInput unless fixes are
/// strictly increasing in time.
std::vector<StayPoint> detect_stay_points(std::span<const GpsFix> fixes, const GeoParams& params);

/// Movement intervals: covered stretches between stay points that hold at
/// least one fix not belonging to a stay point.
std::vector<Transition> derive_transitions(std::span<const GpsFix> fixes,
                                           std::span<const StayPoint> stay_points,
                                           std::span<const CoverageInterval> location_coverage);

/// Single-linkage clustering of stay points by centroid distance.
std::vector<Place> merge_places(std::span<const StayPoint> stay_points, const GeoParams& params);

/// Resolves from_place/to_place of each transition through the place visits.
void link_places(std::vector<Transition>& transitions, std::span<const Place> places);

/// r_min + (r_max - r_min) * sqrt(dwell / max_dwell). Throws InvalidRange.
double circle_radius_px(double dwell_s, double max_dwell_s, double r_min_px, double r_max_px);

/// Stay points, transitions and places for a validated day.
DayAnalysis analyze_day(const DayLog& day, const GeoParams& params);

}  // namespace footprint
