#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "footprint/model.hpp"
#include "support/test_support.hpp"

using namespace footprint;
using footprint::ftest::at;
using footprint::ftest::fixture_date;

namespace {

DayLog small_day() {
  DayLog d;
  d.window = DayWindow::for_date(fixture_date(), 0);
  d.fixes = {{at(9), 32.65, -16.9167}, {at(9, 1), 32.6501, -16.9167}, {at(9, 2), 32.6502, -16.9166}};
  d.images = {{at(9, 30), "2013-05-01#000000", "a.jpg"}, {at(9, 31), "2013-05-01#000001", "b.jpg"}};
  return d;
}

}  // namespace

TEST(ValidateDay, WellFormedDayHasEmptyReport) { EXPECT_TRUE(validate_day(small_day()).empty()); }

TEST(ValidateDay, LatitudeOutOfBounds) {
  auto d = small_day();
  d.fixes[1].lat = 91;
  auto r = validate_day(d);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].field, "fixes[1].lat");
  EXPECT_EQ(r[0].rule, "lat-bounds");
}

TEST(ValidateDay, ImageBeforeWindow) {
  auto d = small_day();
  d.images.insert(d.images.begin(), {d.window.start - std::chrono::seconds{1}, "2013-05-01#000009", "z.jpg"});
  auto r = validate_day(d);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].rule, "in-window");
}

TEST(ValidateDay, FixesMustStrictlyIncrease) {
  auto d = small_day();
  d.fixes[2].t = d.fixes[1].t;
  auto r = validate_day(d);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].rule, "strictly-sorted");
}

TEST(ValidateDay, SmsCarriesNoDuration) {
  auto d = small_day();
  d.events.push_back({at(10), ContextChannel::sms, Direction::incoming, 5});
  auto r = validate_day(d);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].rule, "sms-zero-duration");
}

TEST(ValidateDay, CoverageMustBeNonEmptyAndInside) {
  auto d = small_day();
  d.coverage.push_back({Channel::location, at(10), at(10)});
  d.coverage.push_back({Channel::call, at(23), at(23) + std::chrono::hours{2}});
  auto r = validate_day(d);
  EXPECT_EQ(r.size(), 2u);
}

TEST(ValidateDay, DuplicateMediaIds) {
  auto d = small_day();
  d.images[1].media_id = d.images[0].media_id;
  auto r = validate_day(d);
  ASSERT_EQ(r.size(), 1u);
}

TEST(Model, CoordinateBoundsRejectNonFinite) {
  EXPECT_TRUE(valid_latitude(-90));
  EXPECT_FALSE(valid_latitude(std::nan("")));
  EXPECT_FALSE(valid_longitude(std::numeric_limits<double>::infinity()));
  EXPECT_FALSE(valid_longitude(180.5));
}

TEST(Model, EnumNamesRoundTrip) {
  for (Channel c : kAllChannels) {
    Channel back{};
    ASSERT_TRUE(parse_channel(to_string(c), back));
    EXPECT_EQ(back, c);
  }
  Direction d{};
  EXPECT_FALSE(parse_direction("sideways", d));
}
