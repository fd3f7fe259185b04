#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>

#include "footprint/serialize.hpp"
#include "footprint/service.hpp"
#include "support/test_support.hpp"

using namespace footprint;
using footprint::ftest::at;

namespace {

const std::string kDay = std::string(FIXTURE_DIR) + "/day/";

httplib::MultipartFormDataItems fixture_upload(bool with_media = true) {
  httplib::MultipartFormDataItems items{
      {"manifest", R"({"tz_offset_minutes":0})", "manifest.json", "application/json"},
      {"gps", read_file(kDay + "gps.csv"), "gps.csv", "text/csv"},
      {"context", read_file(kDay + "context.csv"), "context.csv", "text/csv"},
      {"images", read_file(kDay + "images/images.csv"), "images.csv", "text/csv"},
      {"coverage", read_file(kDay + "coverage.csv"), "coverage.csv", "text/csv"},
  };
  if (with_media) {
    for (const auto& entry : fs::directory_iterator(kDay + "images")) {
      if (entry.path().extension() != ".jpg") continue;
      items.push_back({"media", read_file(entry.path()), entry.path().filename().string(), "image/jpeg"});
    }
  }
  return items;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("footprint-svc-" + std::to_string(::getpid()) + "-" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    store_ = std::make_unique<Store>(root_);
    service_ = std::make_unique<Service>(*store_, AnalysisConfig{}, [] { return at(21); });
    port_ = service_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->run(); });
    service_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    service_->stop();
    thread_.join();
    fs::remove_all(root_);
  }

  httplib::Result ingest() { return client_->Post("/api/days/2013-05-01", fixture_upload()); }

  Json post_json(const std::string& path, const std::string& body, int expect) {
    auto r = client_->Post(path, body, "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << r->body;
    return Json::parse(r->body);
  }

  fs::path root_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

std::string episode(const std::string& from, const std::string& to, const std::string& activity = "work") {
  return Json{{"start", "2013-05-01T" + from + "Z"}, {"end", "2013-05-01T" + to + "Z"}, {"activity", activity},
              {"affect", {{"valence", 5}}}}
      .dump();
}

}  // namespace

TEST_F(ServiceTest, IngestCountsThenConflict) {
  auto r = ingest();
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 201) << r->body;
  auto body = Json::parse(r->body);
  EXPECT_EQ(body["fixes"], 541);
  EXPECT_EQ(body["images"], 40);
  EXPECT_EQ(body["events"], 3);
  EXPECT_EQ(body["stay_points"], 3);
  EXPECT_EQ(body["places"], 3);
  EXPECT_TRUE(body["warnings"].empty());

  auto again = ingest();
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(Json::parse(again->body)["error"], "AlreadyIngested");
  auto forced = client_->Post("/api/days/2013-05-01?force=1", fixture_upload());
  EXPECT_EQ(forced->status, 201);

  auto days = client_->Get("/api/days");
  EXPECT_EQ(Json::parse(days->body), Json::parse(R"({"days":["2013-05-01"]})"));
}

TEST_F(ServiceTest, BadRowNamesItsLine) {
  Json body{{"gps", "timestamp,lat,lon\n2013-05-01T09:00:00Z,32.65,-16.9\n2013-05-01T09:01:00Z,95.0,-16.9\n"}};
  auto r = client_->Post("/api/days/2013-05-01", body.dump(), "application/json");
  ASSERT_EQ(r->status, 422);
  auto err = Json::parse(r->body);
  EXPECT_EQ(err["error"], "ParseError");
  ASSERT_EQ(err["errors"].size(), 1u);
  EXPECT_EQ(err["errors"][0]["kind"], "MalformedRow");
  EXPECT_EQ(err["errors"][0]["line"], 3);
  EXPECT_EQ(err["errors"][0]["channel"], "gps");
}

TEST_F(ServiceTest, EmptyDayIs422) {
  Json body{{"gps", "timestamp,lat,lon\n"}};
  auto r = client_->Post("/api/days/2013-05-01", body.dump(), "application/json");
  ASSERT_EQ(r->status, 422);
  EXPECT_EQ(Json::parse(r->body)["error"], "EmptyDay");
}

TEST_F(ServiceTest, TimelineIsCacheableAndPartitioned) {
  ASSERT_EQ(ingest()->status, 201);
  auto a = client_->Get("/api/days/2013-05-01/timeline");
  auto b = client_->Get("/api/days/2013-05-01/timeline");
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
  const auto etag = a->get_header_value("ETag");
  EXPECT_FALSE(etag.empty());
  EXPECT_EQ(etag, b->get_header_value("ETag"));
  EXPECT_EQ(a->body, *store_->read_document(ftest::fixture_date(), kTimelineDoc));

  auto tl = timeline_from_json(Json::parse(a->body));
  for (Channel c : kAllChannels) EXPECT_TRUE(check_partition(tl.track(c), tl.window).empty());

  auto cached = client_->Get("/api/days/2013-05-01/timeline", {{"If-None-Match", etag}});
  EXPECT_EQ(cached->status, 304);
  EXPECT_EQ(client_->Get("/api/days/2013-05-02/timeline")->status, 404);
  EXPECT_EQ(client_->Get("/api/days/2013-05-01/analysis")->status, 200);
}

TEST_F(ServiceTest, WindowQueries) {
  ASSERT_EQ(ingest()->status, 201);
  auto r = client_->Get("/api/days/2013-05-01/window?from=2013-05-01T10:00:00Z&to=2013-05-01T14:00:00Z");
  ASSERT_EQ(r->status, 200) << r->body;
  auto w = Json::parse(r->body);
  ASSERT_EQ(w["places"].size(), 2u);
  double dwell_a = 0, dwell_b = 0;
  for (const auto& p : w["places"]) {
    if (p["total_dwell_s"] == 10800.0) dwell_a = p["window_dwell_s"];
    else dwell_b = p["window_dwell_s"];
  }
  EXPECT_EQ(dwell_a, 7200.0);
  EXPECT_EQ(dwell_b, 5400.0);
  for (const auto& p : w["places"]) {
    const double expected = p["window_dwell_s"] == 7200.0 ? 40.0 : 6 + 34 * std::sqrt(5400.0 / 7200.0);
    EXPECT_NEAR(p["circle_radius_px"].get<double>(), expected, 1e-9);
  }
  EXPECT_EQ(w["frames"].size(), 15u);
  EXPECT_EQ(w["sequence"].size(), 15u);

  auto empty = client_->Get("/api/days/2013-05-01/window?from=2013-05-01T20:00:00Z&to=2013-05-01T21:00:00Z");
  ASSERT_EQ(empty->status, 200);
  auto e = Json::parse(empty->body);
  EXPECT_TRUE(e["frames"].empty() && e["places"].empty() && e["fixes"].empty() && e["events"].empty());

  auto all = Json::parse(
      client_->Get("/api/days/2013-05-01/window?from=2013-05-01T00:00:00Z&to=2013-05-02T00:00:00Z")->body);
  EXPECT_EQ(all["frames"].size(), 40u);
  EXPECT_EQ(all["fixes"].size(), 541u);
  EXPECT_EQ(all["events"].size(), 3u);

  EXPECT_EQ(client_->Get("/api/days/2013-05-01/window?from=yesterday&to=2013-05-01T21:00:00Z")->status, 400);
  EXPECT_EQ(client_->Get("/api/days/2013-05-01/window?from=2013-05-01T12:00:00Z&to=2013-05-01T11:00:00Z")->status,
            400);
  EXPECT_EQ(client_->Get("/api/days/2013-05-03/window?from=2013-05-03T10:00:00Z&to=2013-05-03T11:00:00Z")->status,
            404);
}

TEST_F(ServiceTest, MediaServing) {
  ASSERT_EQ(ingest()->status, 201);
  auto r = client_->Get("/api/media/2013-05-01/2013-05-01%23000000");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(r->body, read_file(kDay + "images/img_0001.jpg"));
  EXPECT_EQ(r->get_header_value("Content-Type"), "image/jpeg");
  EXPECT_NE(r->get_header_value("Cache-Control").find("immutable"), std::string::npos);
  EXPECT_EQ(client_->Get("/api/media/2013-05-01/2013-05-01%23000999")->status, 404);
  EXPECT_EQ(client_->Get("/api/media/2013-05-01/..%2Fdaylog.json")->status, 404);
  EXPECT_EQ(client_->Get("/api/media/2013-05-01/../../days/2013-05-01/daylog.json")->status, 404);
}

TEST_F(ServiceTest, SessionLifecycle) {
  EXPECT_EQ(client_->Post("/api/days/2013-05-01/sessions", "", "application/json")->status, 404);
  ASSERT_EQ(ingest()->status, 201);
  auto created = post_json("/api/days/2013-05-01/sessions", "", 201);
  const std::string id = created["session_id"];
  EXPECT_EQ(id, "s0001");
  const std::string base = "/api/days/2013-05-01/sessions/" + id;

  auto appended = post_json(base + "/episodes", episode("09:00:00", "10:00:00"), 201);
  EXPECT_EQ(appended["result"]["episode_id"], "e0001");
  EXPECT_EQ(appended["result"]["created_at"], "2013-05-01T21:00:00Z");
  EXPECT_EQ(store_->load_session(ftest::fixture_date(), id)->episodes().size(), 1u);

  auto overlap = post_json(base + "/episodes", episode("09:30:00", "11:00:00"), 409);
  EXPECT_EQ(overlap["error"], "ChronologyViolation");
  post_json(base + "/episodes", episode("11:00:00", "12:00:00"), 201);
  post_json(base + "/episodes", episode("12:00:00", "12:00:00"), 400);
  post_json(base + "/episodes", "{not json", 400);

  auto amended = client_->Put(base + "/episodes/last", episode("11:00:00", "12:15:00", "lunch"), "application/json");
  ASSERT_EQ(amended->status, 200);
  EXPECT_EQ(Json::parse(amended->body)["result"]["episode_id"], "e0002");

  auto fin = post_json(base + "/finalize", "", 200);
  EXPECT_EQ(fin["result"]["count"], 3);
  post_json(base + "/episodes", episode("13:00:00", "14:00:00"), 409);
  EXPECT_EQ(Json::parse(client_->Post(base + "/finalize", "", "application/json")->body)["error"],
            "SessionFinalized");

  auto csv = client_->Get(base + "/export?format=csv");
  ASSERT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body, export_episodes(*store_->load_session(ftest::fixture_date(), id), ExportFormat::csv));
  EXPECT_EQ(client_->Get(base + "/export?format=xml")->status, 400);
  EXPECT_EQ(client_->Get("/api/days/2013-05-01/sessions/s0099")->status, 404);
  EXPECT_EQ(client_->Get("/api/days/2013-05-01/sessions/s0099/export")->status, 404);

  auto listed = Json::parse(client_->Get("/api/days/2013-05-01/sessions")->body);
  EXPECT_EQ(listed, Json::parse(R"({"sessions":["s0001"]})"));
  EXPECT_TRUE(verify_store(root_).empty());
}

TEST_F(ServiceTest, ConcurrentAppendsAreSerialized) {
  ASSERT_EQ(ingest()->status, 201);
  post_json("/api/days/2013-05-01/sessions", "", 201);
  const std::string path = "/api/days/2013-05-01/sessions/s0001/episodes";
  std::vector<std::thread> workers;
  std::atomic<int> accepted{0};
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&, w] {
      httplib::Client c("127.0.0.1", port_);
      for (int k = 0; k < 6; ++k) {
        char from[32], to[32];
        const int m = (w * 6 + k) * 10;
        std::snprintf(from, sizeof from, "%02d:%02d:00", 8 + m / 60, m % 60);
        std::snprintf(to, sizeof to, "%02d:%02d:00", 8 + (m + 10) / 60, (m + 10) % 60);
        auto r = c.Post(path, episode(from, to), "application/json");
        if (r && r->status == 201) ++accepted;
      }
    });
  }
  for (auto& t : workers) t.join();
  auto s = store_->load_session(ftest::fixture_date(), "s0001");
  ASSERT_TRUE(s);
  EXPECT_EQ(static_cast<int>(s->episodes().size()), accepted.load());
  for (std::size_t i = 1; i < s->episodes().size(); ++i) {
    EXPECT_LE(s->episodes()[i - 1].end, s->episodes()[i].start);
  }
}

TEST(BindAddress, Parsing) {
  EXPECT_EQ(parse_bind_address("127.0.0.1:8080"), std::make_pair(std::string("127.0.0.1"), 8080));
  EXPECT_EQ(parse_bind_address("9000"), std::make_pair(std::string("127.0.0.1"), 9000));
  EXPECT_THROW(parse_bind_address("host:notaport"), std::invalid_argument);
  EXPECT_THROW(parse_bind_address("host:70000"), std::invalid_argument);
}
