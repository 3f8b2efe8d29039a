#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dollhouse/planning/occupancy.hpp"
#include "dollhouse/robotsim/robotsim.hpp"
#include "dollhouse/server/config.hpp"

namespace dollhouse {

struct PickPlaceCommand {
  int object_id = 0;
  Vec3 drop_point = Vec3::Zero();
  std::string request_id;
};

enum class Outcome { success, failure };
std::string_view to_string(Outcome outcome);

struct PhaseDuration {
  MissionPhase phase = MissionPhase::idle;
  double seconds = 0.0;
};

struct MissionRecord {
  std::string request_id;
  int object_id = -1;
  std::string label;
  Outcome outcome = Outcome::failure;
  std::optional<std::string> failure_tag;
  std::vector<PhaseDuration> durations;  // phases entered, in order
  double ui_latency = 0.0;
  Vec3 drop_point = Vec3::Zero();     // as commanded
  Vec3 planned_drop = Vec3::Zero();   // after snapping to a support
  double snap_distance = 0.0;
  std::optional<Vec3> final_position;  // true placement reference after a success
  /// Where an infeasible drop was detected: "before_pick" or "after_grasp".
  std::string drop_resolved;
  std::optional<RigidTransform> correction;  // grasp-time ICP result (odometry -> scene)
  std::optional<RigidTransform> odom_error;  // simulated error at capture time

  double duration(MissionPhase phase) const;
  /// UI latency plus planning, both navigation legs, grasping and placing.
  double total_duration() const;
};

nlohmann::json to_json(const MissionRecord& record);
MissionRecord record_from_json(const nlohmann::json& j);

/// The planner's view of the world: the bundle as scanned plus the current
/// object clouds, which follow completed placements.
class SceneModel {
 public:
  SceneModel(std::shared_ptr<const SceneBundle> bundle, const PlannerConfig& planner);

  const SceneBundle& bundle() const { return *bundle_; }
  std::shared_ptr<const SceneBundle> shared_bundle() const { return bundle_; }
  std::shared_ptr<const KdTree> static_tree() const { return static_tree_; }
  const OccupancyGrid& occupancy() const { return *occupancy_; }
  /// Incremented by every move.
  int version() const { return version_; }
  /// Identifies the object placement state: equal keys mean equal clouds
  /// (offsets compared at 1e-6 m).
  std::string state_key() const;

  const PointCloud& object_cloud(int id) const;
  /// Current placement reference of an object.
  Vec3 object_position(int id) const;
  /// Translation applied to the object since the scan.
  Vec3 object_offset(int id) const;
  bool displaced(int id, double tol = 0.01) const;
  void move_object(int id, const Vec3& position);
  void restore_object(int id);

  /// Static points and current object points within `radius` of `center`.
  PointCloud crop(const Vec3& center, double radius) const;

  /// Highest support top (or the floor) at most `max_drop` below `p` whose
  /// footprint contains p. Returns p unchanged when none qualifies.
  Vec3 snap_to_support(const Vec3& p, double max_drop) const;

 private:
  std::shared_ptr<const SceneBundle> bundle_;
  std::shared_ptr<const KdTree> static_tree_;
  std::unique_ptr<OccupancyGrid> occupancy_;
  std::vector<Vec3> offsets_;
  std::vector<PointCloud> clouds_;
  int version_ = 0;
};

/// Optional callbacks for a paced, observable run.
struct MissionHooks {
  std::function<void(const RobotSim&)> on_update;  // after phase changes and motion ticks
  std::function<void(double)> pace;                 // called with simulated seconds just spent
  double nav_tick = 0.0;                            // simulated seconds per motion tick; 0: one tick
  /// Fault injection: runs on entering grasping, before the arm moves.
  std::function<void(RobotSim&)> on_grasp_start;
};

/// Runs pick-and-place missions against a RobotSim. Keeps plan caches keyed
/// on the scene placement state, so repeated identical missions plan once.
class MissionExecutor {
 public:
  MissionExecutor(SceneModel& model, MissionConfig config);

  const MissionConfig& config() const { return config_; }

  /// Snapped drop point and its feasibility verdict.
  std::pair<Verdict, Vec3> check_drop(const Vec3& drop_point) const;

  /// Localize, plan, drive, grasp with ICP correction, carry, place, return
  /// and localize again. Randomness for latencies and failure draws comes
  /// from `rng`, drawn up front in a fixed order. Errors and injected
  /// failures end the mission with their tag; the robot is left idle.
  /// Success moves the object in the model.
  MissionRecord execute(const PickPlaceCommand& cmd, RobotSim& sim, std::mt19937_64& rng,
                        const MissionHooks& hooks = {});

 private:
  struct ObjectCache;
  struct StateCache {
    std::map<int, std::shared_ptr<ObjectCache>> objects;
    std::map<std::string, DropPlan> drops;
  };
  StateCache& state_cache();

  SceneModel& model_;
  MissionConfig config_;
  std::map<std::string, StateCache> caches_;
};

}  // namespace dollhouse
