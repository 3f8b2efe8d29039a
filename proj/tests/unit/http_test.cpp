#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "dollhouse/scene/ply.hpp"
#include "dollhouse/server/http.hpp"
#include "httplib.h"
#include "support/default_scene.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;

struct Live {
  explicit Live(ServerConfig cfg, std::shared_ptr<const SceneBundle> bundle = testing::default_bundle())
      : service(std::move(cfg), std::move(bundle)), http(service), port(http.start("127.0.0.1", 0)),
        client("127.0.0.1", port) {}

  json get(const std::string& path, int expect = 200) {
    const auto r = client.Get(path);
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
  std::pair<int, json> post(const std::string& path, const std::string& body) {
    const auto r = client.Post(path, body, "application/json");
    EXPECT_TRUE(r) << path;
    if (!r) return {0, {}};
    return {r->status, json::parse(r->body)};
  }

  MissionService service;
  HttpServer http;
  int port;
  httplib::Client client;
};

ServerConfig paced_config() {
  ServerConfig c;
  c.time_scale = 200.0;
  c.nav_tick = 0.25;
  c.mission.drift = DriftModel{0.0, 0.0, 0};
  c.mission.planner.capture_noise = 0.0;
  return c;
}

// Polls until the given request has a terminal result, checking the status
// invariant on every snapshot. Returns the distinct phases seen, in order.
std::vector<std::string> poll_until_done(Live& live, const std::string& request_id) {
  std::vector<std::string> phases;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
  while (std::chrono::steady_clock::now() < deadline) {
    const json s = live.get("/api/status");
    const bool idle = s["phase"] == "idle";
    EXPECT_EQ(idle, s["active_request"].is_null()) << s.dump();
    if (!idle && (phases.empty() || phases.back() != s["phase"])) phases.push_back(s["phase"]);
    if (!s["last_result"].is_null() && s["last_result"]["request_id"] == request_id) return phases;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ADD_FAILURE() << "request " << request_id << " did not finish";
  return phases;
}

bool follows_canonical_order(const std::vector<std::string>& seen) {
  std::size_t at = 0;
  for (const auto& name : seen) {
    const auto p = parse_phase(name);
    if (!p) return false;
    while (at < kPhaseOrder.size() && kPhaseOrder[at] != *p) ++at;
    if (at == kPhaseOrder.size()) return false;
  }
  return true;
}

TEST(HttpProtocolTest, ScriptedClientSession) {
  Live live(paced_config());
  const json fresh = live.get("/api/status");
  EXPECT_EQ(fresh["phase"], "idle");
  EXPECT_TRUE(fresh["last_result"].is_null());

  const json scene = live.get("/api/scene");
  ASSERT_EQ(scene["objects"].size(), 6u);
  const auto ply = live.client.Get(scene["static_cloud"]["uri"].get<std::string>());
  ASSERT_TRUE(ply);
  EXPECT_EQ(ply->status, 200);
  EXPECT_EQ(parse_ply(ply->body).size(), scene["static_cloud"]["points"].get<std::size_t>());
  EXPECT_EQ(live.client.Get("/clouds/nothing.ply")->status, 404);

  const json items = live.get("/api/items");
  EXPECT_EQ(items.size(), 6u);

  EXPECT_EQ(live.post("/api/command", "{oops").first, 400);
  EXPECT_EQ(live.post("/api/command", R"({"object_id": 99, "drop_point": [2,1,0], "request_id": "a"})").first, 400);
  const auto [code422, body422] =
      live.post("/api/command", R"({"object_id": 0, "drop_point": [-3, 1, 0], "request_id": "b"})");
  EXPECT_EQ(code422, 422);
  EXPECT_EQ(body422["verdict"], "outside_area");

  const auto [code, body] = live.post("/api/command", R"({"object_id": 0, "drop_point": [2, 1.2, 0], "request_id": "c"})");
  ASSERT_EQ(code, 202);
  EXPECT_EQ(body["request_id"], "c");
  EXPECT_EQ(live.post("/api/command", R"({"object_id": 1, "drop_point": [2.4, 1.2, 0], "request_id": "d"})").first,
            409);
  EXPECT_EQ(live.post("/api/reset", "").first, 409);

  const auto phases = poll_until_done(live, "c");
  EXPECT_TRUE(follows_canonical_order(phases));
  EXPECT_GE(phases.size(), 3u);
  const json done = live.get("/api/status");
  EXPECT_EQ(done["last_result"]["outcome"], "success");
  const json moved = live.get("/api/scene");
  const auto& pose = moved["objects"][0]["current_pose"];
  EXPECT_LT(std::hypot(pose[0].get<double>() - 2.0, pose[1].get<double>() - 1.2), 0.05);

  const auto [reset_code, reset_body] = live.post("/api/reset", "");
  ASSERT_EQ(reset_code, 202);
  EXPECT_EQ(reset_body["missions"], json::array({0}));
  poll_until_done(live, reset_body["request_id"].get<std::string>());
  EXPECT_EQ(live.get("/api/status")["last_result"]["outcome"], "success");
}

TEST(HttpProtocolTest, PhaseSequencesAreCanonicalOnEveryRun) {
  Live live(paced_config());
  for (int run = 0; run < 3; ++run) {
    const std::string id = "run" + std::to_string(run);
    const json cmd{{"object_id", run}, {"drop_point", {1.8 + 0.4 * run, 1.2, 0.0}}, {"request_id", id}};
    ASSERT_EQ(live.post("/api/command", cmd.dump()).first, 202);
    const auto phases = poll_until_done(live, id);
    EXPECT_TRUE(follows_canonical_order(phases)) << run;
  }
}

TEST(HttpProtocolTest, MissingBundleGives503) {
  Live live(paced_config(), nullptr);
  live.get("/api/scene", 503);
  live.get("/api/items", 503);
  EXPECT_EQ(live.client.Get("/clouds/static.ply")->status, 503);
  EXPECT_EQ(live.get("/api/status")["phase"], "idle");
}

}  // namespace
}  // namespace dollhouse
