#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "dollhouse/scene/ply.hpp"
#include "dollhouse/server/service.hpp"
#include "support/default_scene.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

ServerConfig fast_config() {
  ServerConfig c;
  c.time_scale = 0.0;
  c.mission.drift = DriftModel{0.0, 0.0, 0};
  c.mission.planner.capture_noise = 0.0;
  return c;
}

std::string pick(int id, const Vec3& p, const std::string& request_id) {
  return json{{"object_id", id}, {"drop_point", {p.x(), p.y(), p.z()}}, {"request_id", request_id}}.dump();
}

Vec3 vec(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

TEST(MissionServiceTest, FreshServerIsIdle) {
  MissionService s(fast_config(), testing::default_bundle());
  const auto r = s.status();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["phase"], "idle");
  EXPECT_TRUE(r.body["active_request"].is_null());
  EXPECT_TRUE(r.body["last_result"].is_null());
  EXPECT_DOUBLE_EQ(r.body["battery"].get<double>(), 100.0);
}

TEST(MissionServiceTest, NoBundleGives503ExceptStatus) {
  MissionService s(fast_config(), nullptr);
  EXPECT_EQ(s.scene().status, 503);
  EXPECT_EQ(s.items().status, 503);
  EXPECT_EQ(s.command(pick(0, {2, 1, 0}, "a")).status, 503);
  EXPECT_EQ(s.reset("").status, 503);
  EXPECT_EQ(s.status().status, 200);
  EXPECT_FALSE(s.cloud_ply("static"));
}

TEST(MissionServiceTest, EmptyBundleDirectoryLoadsNothing) {
  const auto dir = std::filesystem::temp_directory_path() / "dollhouse_empty_bundle";
  std::filesystem::create_directories(dir);
  std::string reason;
  EXPECT_EQ(try_load_bundle(dir, &reason), nullptr);
  EXPECT_FALSE(reason.empty());
}

TEST(MissionServiceTest, ItemsAreDeterministicWithDistinctColors) {
  MissionService s(fast_config(), testing::default_bundle());
  const auto a = s.items();
  ASSERT_EQ(a.status, 200);
  ASSERT_EQ(a.body.size(), 6u);
  std::set<std::string> colors;
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.body[i]["object_id"], static_cast<int>(i));
    colors.insert(a.body[i]["color"].get<std::string>());
  }
  EXPECT_EQ(colors.size(), 6u);
  EXPECT_EQ(s.items().body, a.body);

  auto still = std::make_shared<SceneBundle>(*testing::default_bundle());
  for (auto& o : still->objects) o.movable = false;
  MissionService t(fast_config(), still);
  EXPECT_TRUE(t.items().body.empty());
}

TEST(MissionServiceTest, SceneManifestAndCloudBudget) {
  ServerConfig cfg = fast_config();
  cfg.max_cloud_points = 20000;
  MissionService s(cfg, testing::default_bundle());
  const auto r = s.scene();
  ASSERT_EQ(r.status, 200);
  const auto& b = *testing::default_bundle();
  ASSERT_EQ(r.body["objects"].size(), b.objects.size());
  std::size_t total = r.body["static_cloud"]["points"].get<std::size_t>();
  for (std::size_t i = 0; i < b.objects.size(); ++i) {
    const auto& o = r.body["objects"][i];
    EXPECT_EQ(o["label"], b.objects[i].label);
    EXPECT_LT((vec(o["current_pose"]) - b.objects[i].origin_pose).norm(), 1e-12);
    total += o["cloud"]["points"].get<std::size_t>();
    const auto ply = s.cloud_ply("object_" + std::to_string(i));
    ASSERT_TRUE(ply);
    EXPECT_EQ(parse_ply(*ply).size(), o["cloud"]["points"].get<std::size_t>());
  }
  EXPECT_LE(total, 20000u);
  EXPECT_EQ(r.body["drawers"].size(), b.drawers.size());
  EXPECT_EQ(r.body["supports"].size(), b.supports.size());
  EXPECT_GE(r.body["workspace"]["polygon"].size(), 3u);
  EXPECT_FALSE(s.cloud_ply("object_99"));
  EXPECT_FALSE(s.cloud_ply("../etc"));
}

TEST(MissionServiceTest, CommandValidation) {
  MissionService s(fast_config(), testing::default_bundle());
  EXPECT_EQ(s.command("not json").status, 400);
  EXPECT_EQ(s.command("[1,2]").status, 400);
  EXPECT_EQ(s.command(R"({"object_id": 0, "drop_point": [2, 1, 0]})").status, 400);
  EXPECT_EQ(s.command(pick(17, {2, 1, 0}, "u")).status, 400);
  EXPECT_EQ(s.command(R"({"object_id": 0, "drop_point": [2, 1], "request_id": "v"})").status, 400);
  EXPECT_EQ(s.command(R"({"type": "fly", "request_id": "w"})").status, 400);
  EXPECT_EQ(s.command(R"({"drawer_id": 9, "target_opening": 0.1, "request_id": "x"})").status, 400);

  const auto outside = s.command(pick(0, {9.0, 9.0, 0.0}, "far"));
  EXPECT_EQ(outside.status, 422);
  EXPECT_EQ(outside.body["verdict"], "outside_area");
  // Rejected commands never reach the robot.
  EXPECT_TRUE(s.records().empty());
  EXPECT_TRUE(s.status_snapshot().message == "idle");

  const auto ok = s.command(pick(0, {2.0, 1.2, 0.0}, "go"));
  ASSERT_EQ(ok.status, 202);
  EXPECT_EQ(ok.body["request_id"], "go");
  ASSERT_TRUE(s.wait_idle(60s));
  EXPECT_EQ(s.command(pick(1, {2.4, 1.2, 0.0}, "go")).status, 400);  // reused id
  const MissionStatus st = s.status_snapshot();
  ASSERT_TRUE(st.last_result);
  EXPECT_EQ(st.last_result->request_id, "go");
  EXPECT_EQ(st.last_result->outcome, Outcome::success);
  const auto scene = s.scene().body;
  EXPECT_LT((vec(scene["objects"][0]["current_pose"]) - Vec3(2.0, 1.2, 0.0)).norm(), 0.05);
}

TEST(MissionServiceTest, BusyServerRejectsWith409) {
  ServerConfig cfg = fast_config();
  cfg.time_scale = 40.0;
  cfg.mission.timing = TimingConfig{{0, 0}, {20, 0}, {0, 0}, {0, 0}, {0, 0}};
  MissionService s(cfg, testing::default_bundle());
  ASSERT_EQ(s.command(pick(0, {2.0, 1.2, 0.0}, "first")).status, 202);
  EXPECT_EQ(s.command(pick(1, {2.4, 1.2, 0.0}, "second")).status, 409);
  EXPECT_EQ(s.command(R"({"drawer_id": 0, "target_opening": 0.1, "request_id": "d"})").status, 409);
  EXPECT_EQ(s.reset("").status, 409);
  // Validation errors still win over busy.
  EXPECT_EQ(s.command(pick(42, {2.4, 1.2, 0.0}, "third")).status, 400);
  ASSERT_TRUE(s.wait_idle(60s));
  EXPECT_EQ(s.records().size(), 1u);
}

TEST(MissionServiceTest, InjectedFailureIsReported) {
  ServerConfig cfg = fast_config();
  cfg.mission.failures.defaults[FailureMode::empty_grasp] = 1.0;
  MissionService s(cfg, testing::default_bundle());
  ASSERT_EQ(s.command(pick(2, {2.0, 1.2, 0.0}, "eg")).status, 202);
  ASSERT_TRUE(s.wait_idle(60s));
  const auto j = s.status().body;
  EXPECT_EQ(j["phase"], "idle");
  EXPECT_EQ(j["last_result"]["request_id"], "eg");
  EXPECT_EQ(j["last_result"]["outcome"], "failure");
  EXPECT_EQ(j["last_result"]["failure_tag"], "empty_grasp");
}

TEST(MissionServiceTest, DrawerCommandClamps) {
  MissionService s(fast_config(), testing::default_bundle());
  ASSERT_EQ(s.command(R"({"drawer_id": 0, "target_opening": 2.0, "request_id": "d1"})").status, 202);
  ASSERT_TRUE(s.wait_idle(10s));
  const auto d = s.scene().body["drawers"][0];
  EXPECT_DOUBLE_EQ(d["opening"].get<double>(), d["max_extension"].get<double>());
  EXPECT_EQ(s.status_snapshot().last_result->request_id, "d1");
}

TEST(MissionServiceTest, ResetReturnsDisplacedObjectsInIdOrder) {
  MissionService s(fast_config(), testing::default_bundle());
  const auto nothing = s.reset("");
  ASSERT_EQ(nothing.status, 202);
  EXPECT_TRUE(nothing.body["missions"].empty());
  ASSERT_TRUE(s.wait_idle(10s));
  EXPECT_EQ(s.status_snapshot().last_result->request_id, nothing.body["request_id"]);
  EXPECT_TRUE(s.records().empty());

  ASSERT_EQ(s.command(pick(3, {2.0, 1.2, 0.0}, "m3")).status, 202);
  ASSERT_TRUE(s.wait_idle(60s));
  ASSERT_EQ(s.command(pick(1, {2.6, 1.2, 0.0}, "m1")).status, 202);
  ASSERT_TRUE(s.wait_idle(60s));
  ASSERT_EQ(s.command(R"({"drawer_id": 0, "target_opening": 0.2, "request_id": "dr"})").status, 202);
  ASSERT_TRUE(s.wait_idle(10s));

  const auto r = s.reset(R"({"request_id": "back"})");
  ASSERT_EQ(r.status, 202);
  EXPECT_EQ(r.body["missions"], json::array({1, 3}));
  ASSERT_TRUE(s.wait_idle(120s));
  const auto recs = s.records();
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[2].object_id, 1);
  EXPECT_EQ(recs[3].object_id, 3);
  const auto st = s.status_snapshot();
  EXPECT_EQ(st.last_result->request_id, "back");
  EXPECT_EQ(st.last_result->outcome, Outcome::success);
  const auto scene = s.scene().body;
  const auto& b = *testing::default_bundle();
  for (int id : {1, 3}) {
    EXPECT_LT((vec(scene["objects"][id]["current_pose"]) - b.objects[id].origin_pose).norm(), 0.05) << id;
  }
  EXPECT_DOUBLE_EQ(scene["drawers"][0]["opening"].get<double>(), 0.0);
}

}  // namespace
}  // namespace dollhouse
