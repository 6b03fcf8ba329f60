#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "fastdata/service/rest.hpp"
#include "helpers.hpp"

using namespace fastdata;
using nlohmann::json;

namespace {

class Rest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(test::scratch_dir("rest"));
    std::filesystem::copy_file(std::filesystem::path(FASTDATA_DATA_DIR) / "sample_devices.csv",
                               *dir_ / "sample_devices.csv");
    test::write_file(*dir_ / "events.jsonl", "{\"latency\": 1.5, \"host\": \"a\"}\n{\"latency\": 2, \"host\": null}\n");
    test::write_file(*dir_ / "notes.txt", "not a dataset\n");
    mgr_ = new QueryManager({*dir_, 16, {}});
    srv_ = new httplib::Server;
    install_routes(*srv_, *mgr_);
    port_ = srv_->bind_to_any_port("127.0.0.1");
    thread_ = new std::thread([] { srv_->listen_after_bind(); });
    srv_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    srv_->stop();
    thread_->join();
    delete thread_;
    delete srv_;
    delete mgr_;
    delete dir_;
  }

  static httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }

  static json body_of(const httplib::Result& r) { return json::parse(r->body); }

  static std::string submit(const json& spec) {
    auto r = client().Post("/api/queries", spec.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
    return body_of(r)["queryId"].get<std::string>();
  }

  static std::string wait_done(const std::string& id) {
    for (int i = 0; i < 6000; ++i) {
      auto r = client().Get("/api/queries/" + id);
      const auto state = body_of(r)["state"].get<std::string>();
      if (state != "running") return state;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return "running";
  }

  static json devices(std::size_t n, std::uint64_t seed, const std::string& mode = "oneshot") {
    return {{"source", {{"kind", "synthetic-devices"}, {"nPoints", n}}}, {"randomSeed", seed}, {"mode", mode}};
  }

  static inline std::filesystem::path* dir_ = nullptr;
  static inline QueryManager* mgr_ = nullptr;
  static inline httplib::Server* srv_ = nullptr;
  static inline std::thread* thread_ = nullptr;
  static inline int port_ = 0;
};

json strip(json j) {
  j.erase("timings");
  return j;
}

}  // namespace

TEST_F(Rest, Health) {
  auto r = client().Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(body_of(r)["status"], "ok");
}

TEST_F(Rest, InvalidSpecListsFieldErrors) {
  auto r = client().Post("/api/queries", json{{"minSupport", 3}, {"source", {{"kind", "csv"}}}}.dump(),
                         "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  const auto body = body_of(r);
  std::set<std::string> fields;
  for (const auto& f : body["fields"]) fields.insert(f["field"].get<std::string>());
  EXPECT_TRUE(fields.count("minSupport"));
  auto bad = client().Post("/api/queries", "{not json", "application/json");
  EXPECT_EQ(bad->status, 400);
}

TEST_F(Rest, DatasetPathsStayInsideDataDir) {
  for (const char* path : {"../secret.csv", "/etc/passwd", "missing.csv"}) {
    json spec{{"source", {{"kind", "csv"}, {"path", path}}}, {"metricColumns", {"power"}}};
    auto r = client().Post("/api/queries", spec.dump(), "application/json");
    ASSERT_EQ(r->status, 400) << path;
    EXPECT_EQ(body_of(r)["fields"][0]["field"], "source.path");
  }
}

TEST_F(Rest, UnknownIdIs404) {
  auto c = client();
  EXPECT_EQ(c.Get("/api/queries/nope")->status, 404);
  EXPECT_EQ(c.Get("/api/queries/nope/report")->status, 404);
  EXPECT_EQ(c.Post("/api/queries/nope/emit")->status, 404);
  EXPECT_EQ(c.Delete("/api/queries/nope")->status, 404);
  EXPECT_EQ(c.Get("/api/datasets/nope.csv/schema")->status, 404);
}

TEST_F(Rest, CsvQueryCompletes) {
  json spec{{"queryId", "sample"},
            {"source", {{"kind", "csv"}, {"path", "sample_devices.csv"}}},
            {"metricColumns", {"power"}},
            {"attributeColumns", {"device", "region", "firmware"}},
            {"outlierPercentile", 0.1},
            {"minSupport", 0.05}};
  const auto id = submit(spec);
  EXPECT_EQ(id, "sample");
  ASSERT_EQ(wait_done(id), "done");
  auto r = client().Get("/api/queries/" + id + "/report");
  ASSERT_EQ(r->status, 200);
  const auto rep = report_from_json(body_of(r));
  EXPECT_EQ(rep.points_processed, 5000u);
  EXPECT_FALSE(rep.explanations.empty());
  // A second submission with the same id gets a fresh one.
  EXPECT_NE(submit(spec), id);
}

TEST_F(Rest, OneShotReportNotReadyWhileRunning) {
  const auto id = submit(devices(50000000, 1));
  auto c = client();
  auto r = c.Get("/api/queries/" + id + "/report");
  ASSERT_EQ(r->status, 409);
  EXPECT_EQ(body_of(r)["state"], "running");
  EXPECT_EQ(c.Post("/api/queries/" + id + "/emit")->status, 409);
  auto d = c.Delete("/api/queries/" + id);
  EXPECT_EQ(d->status, 200);
  EXPECT_EQ(c.Get("/api/queries/" + id)->status, 404);
}

TEST_F(Rest, EmitMatchesOfflineReplay) {
  auto spec_json = devices(20000000, 5, "streaming");
  spec_json["decayPeriod"] = 50000;
  spec_json["decayRate"] = 0.3;
  spec_json["source"]["batchSize"] = 5000;
  spec_json["source"]["labelNoise"] = 0.05;
  const auto id = submit(spec_json);
  auto c = client();
  while (mgr_->status(id)->progress < 120000) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  auto e = c.Post("/api/queries/" + id + "/emit");
  ASSERT_EQ(e->status, 200) << e->body;
  const std::size_t at = body_of(e)["pointsProcessed"].get<std::size_t>();
  auto r = c.Get("/api/queries/" + id + "/report");
  ASSERT_EQ(r->status, 200);
  const auto served = report_from_json(body_of(r));
  c.Delete("/api/queries/" + id);
  EXPECT_EQ(served.points_processed, at);
  EXPECT_EQ(served.emission, 1u);

  auto spec = parse_query_spec(spec_json).value();
  spec.query_id = id;
  StreamingPipeline pipe(spec);
  auto src = open_source(pipe.spec().source, pipe.spec(), pipe.dictionary());
  while (pipe.points_processed() < at) {
    auto b = src->next_batch();
    ASSERT_TRUE(b.has_value());
    pipe.process_batch(*b);
  }
  ASSERT_EQ(pipe.points_processed(), at);
  auto offline = pipe.emit();
  offline.emission = 1;
  EXPECT_EQ(strip(to_json(offline)), strip(to_json(served)));
}

TEST_F(Rest, ConcurrentQueriesMatchSerialRuns) {
  std::vector<json> specs;
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    auto s = devices(60000, seed, seed % 2 ? "oneshot" : "streaming");
    s["source"]["labelNoise"] = 0.1;
    s["decayPeriod"] = 20000;
    specs.push_back(s);
  }
  std::vector<std::string> ids;
  for (const auto& s : specs) ids.push_back(submit(s));
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ASSERT_EQ(wait_done(ids[i]), "done");
    auto r = client().Get("/api/queries/" + ids[i] + "/report");
    ASSERT_EQ(r->status, 200);
    auto spec = parse_query_spec(specs[i]).value();
    spec.query_id = ids[i];
    const auto serial = run_query(spec).back();
    EXPECT_EQ(strip(body_of(r)), strip(to_json(serial))) << ids[i];
  }
}

TEST_F(Rest, StatusReportsProgress) {
  const auto id = submit(devices(20000, 3, "streaming"));
  ASSERT_EQ(wait_done(id), "done");
  const auto s = body_of(client().Get("/api/queries/" + id));
  EXPECT_EQ(s["mode"], "streaming");
  EXPECT_EQ(s["progress"]["pointsProcessed"], 20000);
  EXPECT_EQ(s["emissions"], 1);
  // A finished streaming query answers emit with its final report.
  auto e = client().Post("/api/queries/" + id + "/emit");
  EXPECT_EQ(e->status, 200);
}

TEST_F(Rest, DatasetsAndSchemas) {
  auto c = client();
  const auto list = body_of(c.Get("/api/datasets"))["datasets"];
  EXPECT_EQ(list, json({"events.jsonl", "sample_devices.csv"}));
  auto r = c.Get("/api/datasets/sample_devices.csv/schema");
  ASSERT_EQ(r->status, 200);
  const auto body = body_of(r);
  std::map<std::string, std::string> types;
  for (const auto& col : body["columns"]) types[col["name"].get<std::string>()] = col["type"].get<std::string>();
  EXPECT_EQ(types["power"], "numeric");
  EXPECT_EQ(types["device"], "categorical");
  EXPECT_EQ(types["timestamp"], "numeric");
  auto j = body_of(c.Get("/api/datasets/events.jsonl/schema"))["columns"];
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["name"], "host");
  EXPECT_EQ(j[0]["type"], "categorical");
  EXPECT_EQ(j[1]["name"], "latency");
  EXPECT_EQ(j[1]["type"], "numeric");
  EXPECT_EQ(c.Get("/api/datasets/..%2Fetc%2Fpasswd/schema")->status, 404);
}
