#include <gtest/gtest.h>

#include "footprint/serialize.hpp"
#include "support/test_support.hpp"

using namespace footprint;
using footprint::ftest::at;
using footprint::ftest::fixture_date;

TEST(Serialize, DayAnalysisTimelineRoundTripOnRandomDays) {
  ftest::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto day = ftest::random_day(rng);
    const auto analysis = analyze_day(day, {});
    const auto tl = compile_timeline(day, analysis);
    EXPECT_EQ(daylog_from_json(Json::parse(canonical_dump(to_json(day)))), day);
    EXPECT_EQ(analysis_from_json(Json::parse(canonical_dump(to_json(analysis)))), analysis);
    EXPECT_EQ(timeline_from_json(Json::parse(canonical_dump(to_json(tl)))), tl);
  }
}

TEST(Serialize, CanonicalDumpIsStable) {
  ftest::Rng rng(14);
  const auto day = ftest::random_day(rng);
  const auto text = canonical_dump(to_json(day));
  EXPECT_EQ(canonical_dump(Json::parse(text)), text);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Serialize, TimelineDocumentShape) {
  DayLog day;
  day.window = DayWindow::for_date(fixture_date(), 0);
  day.events = {{at(10, 5), ContextChannel::sms, Direction::incoming, 0},
                {at(14), ContextChannel::call, Direction::incoming, 120}};
  auto tl = compile_timeline(day, {});
  auto j = to_json(tl);
  for (const char* key : {"visual", "location", "call", "sms"}) {
    ASSERT_TRUE(j.contains(key)) << key;
    EXPECT_TRUE(j[key]["segments"].is_array());
  }
  EXPECT_EQ(j["sms"]["markers"].size(), 1u);
  EXPECT_EQ(j["sms"]["markers"][0]["direction"], "incoming");
  const auto& call = j["call"]["segments"][1];
  EXPECT_EQ(call["kind"], "call");
  EXPECT_EQ(call["start"], "2013-05-01T14:00:00Z");
  EXPECT_EQ(call["meta"]["duration_s"], 120.0);
}

TEST(Serialize, SessionRoundTrip) {
  ReconstructionSession s("s0003", DayWindow::for_date(fixture_date(), 120));
  Episode e;
  e.start = at(8);
  e.end = at(9);
  e.activity = "breakfast";
  e.affect = {{"valence", 4}};
  e.created_at = at(21);
  s.append_episode(e);
  s.finalize();
  EXPECT_EQ(session_from_json(Json::parse(canonical_dump(to_json(s)))), s);
}

TEST(Serialize, ReadersRejectBrokenDocuments) {
  EXPECT_THROW(daylog_from_json(Json::parse("{}")), FormatError);
  EXPECT_THROW(timeline_from_json(Json::parse(R"({"window":1})")), FormatError);
  EXPECT_THROW(episode_request_from_json(Json::parse(R"({"start":"2013-05-01T09:00:00Z"})")), FormatError);
  EXPECT_THROW(episode_request_from_json(Json::parse(R"({"start":"x","end":"y","activity":"a"})")), FormatError);
  // A stored session whose episodes overlap is refused, not loaded.
  Json bad = to_json(ReconstructionSession("s1", DayWindow::for_date(fixture_date(), 0)));
  Episode a;
  a.episode_id = "e0001";
  a.start = at(9);
  a.end = at(11);
  a.activity = "x";
  Episode b = a;
  b.episode_id = "e0002";
  b.start = at(10);
  bad["episodes"] = Json::array({to_json(a), to_json(b)});
  EXPECT_THROW(session_from_json(bad), FormatError);
}

TEST(Serialize, EpisodeRequest) {
  auto e = episode_request_from_json(Json::parse(
      R"({"start":"2013-05-01T09:00:00Z","end":"2013-05-01T10:00:00Z","activity":"run","affect":{"valence":5}})"));
  EXPECT_EQ(e.start, at(9));
  EXPECT_EQ(e.affect.at("valence"), 5);
  EXPECT_TRUE(e.episode_id.empty());
}
