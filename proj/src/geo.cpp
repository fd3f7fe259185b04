#include "footprint/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace footprint {

void GeoParams::check() const {
  if (!(radius_m > 0) || !(min_dwell_s > 0) || !(earth_radius_m > 0) || !(merge_radius_m > 0)) {
    throw std::invalid_argument("geo parameters must be strictly positive");
  }
}

double haversine_m(LatLon a, LatLon b, double earth_radius_m) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kRad;
  const double phi2 = b.lat * kRad;
  const double sin_dphi = std::sin((b.lat - a.lat) * kRad / 2.0);
  const double sin_dlambda = std::sin((b.lon - a.lon) * kRad / 2.0);
  double h = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlambda * sin_dlambda;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * earth_radius_m * std::asin(std::sqrt(h));
}

std::vector<StayPoint> detect_stay_points(std::span<const GpsFix> fixes, const GeoParams& params) {
  params.check();
  for (std::size_t i = 1; i < fixes.size(); ++i) {
    if (!(fixes[i - 1].t < fixes[i].t)) {
      throw UnsortedInput("fixes must be strictly increasing in time (index " + std::to_string(i) +
                          ")");
    }
  }

  std::vector<StayPoint> out;
  const auto min_dwell = std::chrono::duration<double>(params.min_dwell_s);
  const std::size_t n = fixes.size();
  std::size_t i = 0;
  while (i < n) {
    const LatLon anchor = fixes[i].position();
    std::size_t j = i + 1;
    while (j < n && haversine_m(anchor, fixes[j].position(), params.earth_radius_m) <= params.radius_m) {
      ++j;
    }
    const std::size_t k = j - 1;
    if (fixes[k].t - fixes[i].t > min_dwell) {
      StayPoint sp;
      double lat_sum = 0.0, lon_sum = 0.0;
      for (std::size_t m = i; m <= k; ++m) {
        lat_sum += fixes[m].lat;
        lon_sum += fixes[m].lon;
      }
      const auto count = static_cast<double>(k - i + 1);
      sp.centroid_lat = lat_sum / count;
      sp.centroid_lon = lon_sum / count;
      sp.arrival = fixes[i].t;
      sp.departure = fixes[k].t;
      sp.first = i;
      sp.last = k;
      out.push_back(sp);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

namespace {

struct Span {
  Timestamp start;
  Timestamp end;
};

std::vector<Span> union_of(std::span<const CoverageInterval> coverage) {
  std::vector<Span> spans;
  for (const auto& c : coverage) {
    if (c.start < c.end) spans.push_back({c.start, c.end});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  std::vector<Span> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

}  // namespace

std::vector<Transition> derive_transitions(std::span<const GpsFix> fixes,
                                           std::span<const StayPoint> stay_points,
                                           std::span<const CoverageInterval> location_coverage) {
  std::vector<bool> member(fixes.size(), false);
  for (const auto& sp : stay_points) {
    for (std::size_t m = sp.first; m <= sp.last && m < fixes.size(); ++m) member[m] = true;
  }

  auto has_free_fix = [&](Timestamp from, Timestamp to) {
    auto it = std::lower_bound(fixes.begin(), fixes.end(), from,
                               [](const GpsFix& f, Timestamp t) { return f.t < t; });
    for (; it != fixes.end() && it->t <= to; ++it) {
      if (!member[static_cast<std::size_t>(it - fixes.begin())]) return true;
    }
    return false;
  };

  auto stay_departing_at = [&](Timestamp t) -> std::optional<std::size_t> {
    for (std::size_t s = 0; s < stay_points.size(); ++s) {
      if (stay_points[s].departure == t) return s;
    }
    return std::nullopt;
  };
  auto stay_arriving_at = [&](Timestamp t) -> std::optional<std::size_t> {
    for (std::size_t s = 0; s < stay_points.size(); ++s) {
      if (stay_points[s].arrival == t) return s;
    }
    return std::nullopt;
  };

  std::vector<Transition> out;
  for (const Span& covered : union_of(location_coverage)) {
    Timestamp cursor = covered.start;
    std::optional<std::size_t> prev_stay = stay_departing_at(covered.start);
    auto emit = [&](Timestamp end, std::optional<std::size_t> next_stay) {
      if (cursor < end && has_free_fix(cursor, end)) {
        out.push_back({cursor, end, prev_stay, next_stay, std::nullopt, std::nullopt});
      }
    };
    for (std::size_t s = 0; s < stay_points.size(); ++s) {
      const auto& sp = stay_points[s];
      if (sp.departure <= covered.start || sp.arrival >= covered.end) continue;
      emit(sp.arrival, s);
      cursor = std::max(cursor, sp.departure);
      prev_stay = s;
    }
    emit(covered.end, stay_arriving_at(covered.end));
  }
  return out;
}

std::vector<Place> merge_places(std::span<const StayPoint> stay_points, const GeoParams& params) {
  params.check();
  const std::size_t n = stay_points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const LatLon pa{stay_points[a].centroid_lat, stay_points[a].centroid_lon};
      const LatLon pb{stay_points[b].centroid_lat, stay_points[b].centroid_lon};
      if (haversine_m(pa, pb, params.earth_radius_m) <= params.merge_radius_m) {
        parent[find(b)] = find(a);
      }
    }
  }

  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t s = 0; s < n; ++s) groups[find(s)].push_back(s);

  std::vector<Place> places;
  for (auto& visits : groups) {
    if (visits.empty()) continue;
    Millis total{0};
    double lat = 0.0, lon = 0.0;
    for (std::size_t s : visits) {
      const auto& sp = stay_points[s];
      const double w = to_seconds(sp.dwell());
      lat += w * sp.centroid_lat;
      lon += w * sp.centroid_lon;
      total += sp.dwell();
    }
    Place p;
    p.total_dwell_s = to_seconds(total);
    p.centroid_lat = lat / p.total_dwell_s;
    p.centroid_lon = lon / p.total_dwell_s;
    p.visits = std::move(visits);
    places.push_back(std::move(p));
  }

  std::sort(places.begin(), places.end(), [&](const Place& a, const Place& b) {
    if (a.total_dwell_s != b.total_dwell_s) return a.total_dwell_s > b.total_dwell_s;
    return stay_points[a.visits.front()].arrival < stay_points[b.visits.front()].arrival;
  });
  return places;
}

void link_places(std::vector<Transition>& transitions, std::span<const Place> places) {
  std::vector<std::optional<std::size_t>> place_of;
  for (std::size_t p = 0; p < places.size(); ++p) {
    for (std::size_t s : places[p].visits) {
      if (s >= place_of.size()) place_of.resize(s + 1);
      place_of[s] = p;
    }
  }
  auto lookup = [&](std::optional<std::size_t> stay) -> std::optional<std::size_t> {
    if (!stay || *stay >= place_of.size()) return std::nullopt;
    return place_of[*stay];
  };
  for (auto& t : transitions) {
    t.from_place = lookup(t.from_stay);
    t.to_place = lookup(t.to_stay);
  }
}

double circle_radius_px(double dwell_s, double max_dwell_s, double r_min_px, double r_max_px) {
  if (!(dwell_s > 0) || !(dwell_s <= max_dwell_s) || !(r_min_px >= 0) || !(r_min_px < r_max_px)) {
    throw InvalidRange("circle_radius_px requires 0 < dwell <= max_dwell and 0 <= r_min < r_max");
  }
  return r_min_px + (r_max_px - r_min_px) * std::sqrt(dwell_s / max_dwell_s);
}

DayAnalysis analyze_day(const DayLog& day, const GeoParams& params) {
  DayAnalysis a;
  a.stay_points = detect_stay_points(day.fixes, params);
  const auto coverage = coverage_for(day, Channel::location);
  a.transitions = derive_transitions(day.fixes, a.stay_points, coverage);
  a.places = merge_places(a.stay_points, params);
  link_places(a.transitions, a.places);
  return a;
}

}  // namespace footprint
