#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "footprint/geo.hpp"
#include "support/test_support.hpp"

using namespace footprint;
using footprint::ftest::at;
using footprint::ftest::offset;

namespace {

std::vector<GpsFix> still(LatLon p, Timestamp t0, int count, int step_s) {
  std::vector<GpsFix> out;
  for (int k = 0; k < count; ++k) out.push_back({t0 + std::chrono::seconds{step_s * k}, p.lat, p.lon});
  return out;
}

const LatLon kFunchal{32.65, -16.9167};

}  // namespace

TEST(Haversine, IdenticalPointsAreZero) { EXPECT_EQ(haversine_m(kFunchal, kFunchal), 0.0); }

TEST(Haversine, OneDegreeAlongEquator) {
  // Arc length R * dlambda, written out independently of the formula.
  const double expected = 6371000.0 * std::numbers::pi / 180.0;
  EXPECT_NEAR(expected, 111194.9, 0.1);
  EXPECT_NEAR(haversine_m({0, 0}, {0, 1}), expected, 1e-6);
}

TEST(Haversine, AgreesWithVectorFormula) {
  ftest::Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    LatLon a{ftest::uniform(rng, -90, 90), ftest::uniform(rng, -180, 180)};
    LatLon b{ftest::uniform(rng, -90, 90), ftest::uniform(rng, -180, 180)};
    EXPECT_NEAR(haversine_m(a, b), ftest::reference_distance_m(a, b), 1e-3);
  }
}

TEST(Haversine, MetricProperties) {
  ftest::Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    LatLon a{ftest::uniform(rng, -90, 90), ftest::uniform(rng, -180, 180)};
    LatLon b{ftest::uniform(rng, -90, 90), ftest::uniform(rng, -180, 180)};
    LatLon c{ftest::uniform(rng, -90, 90), ftest::uniform(rng, -180, 180)};
    EXPECT_EQ(haversine_m(a, b), haversine_m(b, a));
    EXPECT_EQ(haversine_m(a, a), 0.0);
    EXPECT_LE(haversine_m(a, c), haversine_m(a, b) + haversine_m(b, c) + 1e-6);
  }
}

TEST(StayPoints, EmptyInput) { EXPECT_TRUE(detect_stay_points({}, {}).empty()); }

TEST(StayPoints, SevenFixesSixMinutes) {
  auto fixes = still(kFunchal, at(9), 7, 60);
  auto sp = detect_stay_points(fixes, {});
  ASSERT_EQ(sp.size(), 1u);
  EXPECT_EQ(sp[0].arrival, at(9));
  EXPECT_EQ(sp[0].departure, at(9, 6));
  EXPECT_DOUBLE_EQ(sp[0].centroid_lat, kFunchal.lat);
  EXPECT_DOUBLE_EQ(sp[0].centroid_lon, kFunchal.lon);
  EXPECT_EQ(sp, ftest::oracle_stay_points(fixes, 50, 300));
}

TEST(StayPoints, WalkingAwayNeverStays) {
  std::vector<GpsFix> fixes;
  LatLon p = kFunchal;
  for (int k = 0; k < 30; ++k) {
    fixes.push_back({at(9) + std::chrono::seconds{60 * k}, p.lat, p.lon});
    p = offset(p, 100, 45);
  }
  EXPECT_TRUE(detect_stay_points(fixes, {}).empty());
  EXPECT_TRUE(ftest::oracle_stay_points(fixes, 50, 300).empty());
}

TEST(StayPoints, DwellMustExceedThreshold) {
  EXPECT_TRUE(detect_stay_points(still(kFunchal, at(9), 6, 60), {}).empty());
  auto fixes = still(kFunchal, at(9), 6, 60);
  fixes.back().t += std::chrono::seconds{1};
  EXPECT_EQ(detect_stay_points(fixes, {}).size(), 1u);
}

TEST(StayPoints, RadiusIsMeasuredFromAnchor) {
  // Drifting 30 m per step stays near each neighbour but leaves the anchor.
  std::vector<GpsFix> fixes;
  LatLon p = kFunchal;
  for (int k = 0; k < 20; ++k) {
    fixes.push_back({at(9) + std::chrono::seconds{60 * k}, p.lat, p.lon});
    p = offset(p, 30, 90);
  }
  EXPECT_TRUE(detect_stay_points(fixes, {}).empty());
}

TEST(StayPoints, RejectsUnsortedInput) {
  auto fixes = still(kFunchal, at(9), 3, 60);
  std::swap(fixes[0], fixes[2]);
  EXPECT_THROW(detect_stay_points(fixes, {}), UnsortedInput);
  fixes = still(kFunchal, at(9), 3, 0);
  EXPECT_THROW(detect_stay_points(fixes, {}), UnsortedInput);
}

TEST(StayPoints, MatchesOracleOnRandomTraces) {
  ftest::Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    auto fixes = ftest::random_trace(rng, 200, at(6));
    ASSERT_EQ(detect_stay_points(fixes, {}), ftest::oracle_stay_points(fixes, 50, 300)) << "trace " << i;
  }
}

TEST(StayPoints, InvariantsHoldOnRandomTraces) {
  ftest::Rng rng(100);
  for (int i = 0; i < 200; ++i) {
    auto fixes = ftest::random_trace(rng, 200, at(6));
    auto sps = detect_stay_points(fixes, {});
    for (std::size_t s = 0; s < sps.size(); ++s) {
      const auto& sp = sps[s];
      EXPECT_GT(sp.dwell(), std::chrono::seconds{300});
      for (std::size_t m = sp.first; m <= sp.last; ++m) {
        EXPECT_LE(haversine_m(fixes[sp.first].position(), fixes[m].position()), 50.0);
      }
      if (s > 0) {
        EXPECT_LT(sps[s - 1].last, sp.first);
      }
    }
  }
}

TEST(StayPoints, ParamsMustBePositive) {
  GeoParams p;
  p.radius_m = 0;
  EXPECT_THROW(detect_stay_points({}, p), std::invalid_argument);
}

namespace {

// Stay at A 09:00-10:00, walk, stay at B 10:30-11:30.
std::vector<GpsFix> two_stays() {
  auto fixes = still(kFunchal, at(9), 61, 60);
  LatLon p = kFunchal;
  for (int k = 1; k < 30; ++k) {
    p = offset(p, 80, 0);
    fixes.push_back({at(10) + std::chrono::seconds{60 * k}, p.lat, p.lon});
  }
  p = offset(p, 80, 0);
  auto b = still(p, at(10, 30), 61, 60);
  fixes.insert(fixes.end(), b.begin(), b.end());
  return fixes;
}

}  // namespace

TEST(Transitions, SingleStayFillingCoverage) {
  auto fixes = still(kFunchal, at(9), 61, 60);
  auto sps = detect_stay_points(fixes, {});
  std::vector<CoverageInterval> cov{{Channel::location, at(9), at(10)}};
  EXPECT_TRUE(derive_transitions(fixes, sps, cov).empty());
}

TEST(Transitions, BetweenTwoStays) {
  auto fixes = two_stays();
  auto sps = detect_stay_points(fixes, {});
  ASSERT_EQ(sps.size(), 2u);
  std::vector<CoverageInterval> cov{{Channel::location, at(9), at(11, 30)}};
  auto tr = derive_transitions(fixes, sps, cov);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].start, at(10));
  EXPECT_EQ(tr[0].end, at(10, 30));
  EXPECT_EQ(tr[0].from_stay, 0u);
  EXPECT_EQ(tr[0].to_stay, 1u);
}

TEST(Transitions, LeadingMovementBeforeFirstStay) {
  // Walk 08:30-08:59 then stay from 09:00; coverage from 08:30.
  std::vector<GpsFix> fixes;
  LatLon p = offset(kFunchal, 80 * 30, 180);
  for (int k = 0; k < 30; ++k) {
    fixes.push_back({at(8, 30) + std::chrono::seconds{60 * k}, p.lat, p.lon});
    p = offset(p, 80, 0);
  }
  auto stay = still(kFunchal, at(9), 31, 60);
  fixes.insert(fixes.end(), stay.begin(), stay.end());
  auto sps = detect_stay_points(fixes, {});
  ASSERT_EQ(sps.size(), 1u);
  ASSERT_EQ(sps[0].arrival, at(9));
  std::vector<CoverageInterval> cov{{Channel::location, at(8, 30), at(9, 30)}};
  auto tr = derive_transitions(fixes, sps, cov);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].start, at(8, 30));
  EXPECT_EQ(tr[0].end, at(9));
  EXPECT_FALSE(tr[0].from_stay);
  EXPECT_EQ(tr[0].to_stay, 0u);
}

TEST(Transitions, NoStaysMeansOneTransitionPerCoverageRun) {
  std::vector<GpsFix> fixes;
  LatLon p = kFunchal;
  for (int k = 0; k < 10; ++k) {
    fixes.push_back({at(9) + std::chrono::seconds{60 * k}, p.lat, p.lon});
    p = offset(p, 100, 0);
  }
  std::vector<CoverageInterval> cov{{Channel::location, at(9), at(9, 9)}};
  auto tr = derive_transitions(fixes, {}, cov);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].start, at(9));
  EXPECT_EQ(tr[0].end, at(9, 9));
}

TEST(Transitions, CoveredStretchWithoutFixesIsNotMovement) {
  auto fixes = still(kFunchal, at(9), 61, 60);
  auto sps = detect_stay_points(fixes, {});
  std::vector<CoverageInterval> cov{{Channel::location, at(8), at(11)}};
  EXPECT_TRUE(derive_transitions(fixes, sps, cov).empty());
}

namespace {

StayPoint stay_at(LatLon p, Timestamp arrival, int dwell_s) {
  StayPoint sp;
  sp.centroid_lat = p.lat;
  sp.centroid_lon = p.lon;
  sp.arrival = arrival;
  sp.departure = arrival + std::chrono::seconds{dwell_s};
  return sp;
}

}  // namespace

TEST(Places, OneStayIsOnePlace) {
  std::vector<StayPoint> sps{stay_at(kFunchal, at(9), 600)};
  auto places = merge_places(sps, {});
  ASSERT_EQ(places.size(), 1u);
  EXPECT_EQ(places[0].centroid_lat, kFunchal.lat);
  EXPECT_EQ(places[0].total_dwell_s, 600.0);
  EXPECT_EQ(places[0].visits, std::vector<std::size_t>{0});
}

TEST(Places, CloseStaysMergeWithDwellWeightedCentroid) {
  const LatLon b = offset(kFunchal, 10, 90);
  std::vector<StayPoint> sps{stay_at(kFunchal, at(9), 400), stay_at(b, at(10), 600)};
  auto places = merge_places(sps, {});
  ASSERT_EQ(places.size(), 1u);
  EXPECT_EQ(places[0].total_dwell_s, 1000.0);
  EXPECT_NEAR(places[0].centroid_lat, (400 * kFunchal.lat + 600 * b.lat) / 1000, 1e-12);
  EXPECT_NEAR(places[0].centroid_lon, (400 * kFunchal.lon + 600 * b.lon) / 1000, 1e-12);
}

TEST(Places, FarStaysStaySeparateAndSortByDwell) {
  std::vector<StayPoint> sps{stay_at(kFunchal, at(9), 400), stay_at(offset(kFunchal, 200, 0), at(10), 900)};
  auto places = merge_places(sps, {});
  ASSERT_EQ(places.size(), 2u);
  EXPECT_EQ(places[0].total_dwell_s, 900.0);
  EXPECT_EQ(places[0].visits, std::vector<std::size_t>{1});
}

TEST(Places, SingleLinkageChains) {
  std::vector<StayPoint> sps{stay_at(kFunchal, at(9), 400), stay_at(offset(kFunchal, 40, 0), at(10), 400),
                             stay_at(offset(kFunchal, 80, 0), at(11), 400)};
  auto places = merge_places(sps, {});
  ASSERT_EQ(places.size(), 1u);
  EXPECT_EQ(places[0].visits.size(), 3u);
}

TEST(Places, LinkedIntoTransitions) {
  auto fixes = two_stays();
  DayLog day;
  day.window = DayWindow::for_date(ftest::fixture_date(), 0);
  day.fixes = fixes;
  day.coverage = {{Channel::location, at(9), at(11, 30)}};
  auto a = analyze_day(day, {});
  ASSERT_EQ(a.transitions.size(), 1u);
  ASSERT_EQ(a.places.size(), 2u);
  ASSERT_TRUE(a.transitions[0].from_place && a.transitions[0].to_place);
  EXPECT_NE(*a.transitions[0].from_place, *a.transitions[0].to_place);
}

TEST(CircleRadius, Formula) {
  EXPECT_DOUBLE_EQ(circle_radius_px(100, 100, 6, 40), 40);
  EXPECT_DOUBLE_EQ(circle_radius_px(25, 100, 0, 40), 20);
  EXPECT_LT(circle_radius_px(3600, 7200, 6, 40), circle_radius_px(7200, 7200, 6, 40));
  EXPECT_THROW(circle_radius_px(0, 100, 6, 40), InvalidRange);
  EXPECT_THROW(circle_radius_px(101, 100, 6, 40), InvalidRange);
  EXPECT_THROW(circle_radius_px(50, 100, 40, 6), InvalidRange);
}
