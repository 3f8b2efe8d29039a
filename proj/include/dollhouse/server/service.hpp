#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dollhouse/server/mission.hpp"

namespace dollhouse {

struct DrawerCommand {
  int drawer_id = 0;
  double target_opening = 0.0;
  std::string request_id;
};

struct LastResult {
  std::string request_id;
  Outcome outcome = Outcome::success;
  std::optional<std::string> failure_tag;
};

/// What GET /api/status returns. phase == idle exactly when no request is active.
struct MissionStatus {
  MissionPhase phase = MissionPhase::idle;
  std::optional<std::string> active_request;
  double battery = 100.0;
  Pose2 robot_pose;  // odometry estimate
  std::string message;
  std::optional<LastResult> last_result;
};

nlohmann::json to_json(const MissionStatus& status);

/// Loads a bundle directory, or returns null with a reason when it holds no
/// usable bundle. The server then answers 503 on scene endpoints.
std::shared_ptr<const SceneBundle> try_load_bundle(const std::filesystem::path& dir, std::string* reason = nullptr);

/// Transport-independent server: validates commands, runs missions one at a
/// time on a worker thread that owns the simulator, and publishes status and
/// scene snapshots. Every method is safe to call from any thread.
class MissionService {
 public:
  struct Reply {
    int status = 200;
    nlohmann::json body;
  };

  MissionService(ServerConfig config, std::shared_ptr<const SceneBundle> bundle);
  ~MissionService();
  MissionService(const MissionService&) = delete;
  MissionService& operator=(const MissionService&) = delete;

  bool has_bundle() const { return bundle_ != nullptr; }
  const ServerConfig& config() const { return config_; }

  /// POST /api/command. 400 on malformed body, unknown or static object,
  /// unknown drawer or a reused request_id; 409 while busy; 422 with the
  /// verdict when the snapped drop point fails the operational-area check.
  Reply command(const std::string& body);
  /// POST /api/reset. Body is optional: {"request_id": ...}.
  Reply reset(const std::string& body);
  Reply status() const;
  Reply scene() const;
  Reply items() const;
  /// Downsampled PLY for "static" or "object_<id>" at the current pose.
  std::optional<std::string> cloud_ply(const std::string& name) const;

  MissionStatus status_snapshot() const;
  std::vector<MissionRecord> records() const;
  /// Blocks until no request is queued or running. Returns false on timeout.
  bool wait_idle(std::chrono::milliseconds timeout) const;

 private:
  struct Job {
    std::string request_id;
    std::vector<PickPlaceCommand> missions;
    std::optional<DrawerCommand> drawer;
    bool composite = false;  // reset: also closes drawers and reports its own result
  };

  Reply accept(Job job);
  void worker_loop();
  void run_job(const Job& job);
  MissionRecord run_mission(const PickPlaceCommand& cmd, const std::string& active_id);
  void publish_scene();
  void publish_motion(const RobotSim& sim, const std::string& active_id);
  void finish(const LastResult& result, const std::string& message);
  void pace(double sim_seconds);
  nlohmann::json object_json(int id, const Vec3& offset) const;

  ServerConfig config_;
  std::shared_ptr<const SceneBundle> bundle_;
  std::unique_ptr<SceneModel> model_;          // worker-owned after construction
  std::unique_ptr<MissionExecutor> executor_;  // worker-owned
  std::unique_ptr<RobotSim> sim_;              // worker-owned
  std::uint64_t mission_counter_ = 0;          // worker-owned
  PointCloud static_preview_;
  std::vector<PointCloud> object_previews_;    // as scanned

  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  bool stop_ = false;
  bool busy_ = false;
  std::deque<Job> queue_;
  std::vector<std::string> seen_ids_;
  int reset_counter_ = 0;
  MissionStatus status_;
  std::vector<Vec3> offsets_;
  std::vector<DrawerModel> drawers_;
  int scene_version_ = 0;
  std::vector<MissionRecord> records_;
  std::thread worker_;
};

/// Fixed highlight palette, indexed by object id modulo its size.
const std::vector<std::string>& highlight_palette();

}  // namespace dollhouse
