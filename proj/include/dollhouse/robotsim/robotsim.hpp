#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dollhouse/robotsim/phase.hpp"
#include "dollhouse/scene/bundle.hpp"
#include "dollhouse/scene/kdtree.hpp"

namespace dollhouse {

enum class GripperState { open, closed };

struct RobotState {
  Pose2 true_pose;
  Pose2 odom_pose;  // what the robot believes
  std::optional<Vec3> arm_target;  // in the odometry frame
  GripperState gripper = GripperState::open;
  std::optional<int> carried_object;
  double battery = 100.0;
  MissionPhase phase = MissionPhase::idle;
};

/// Random-walk odometry error: per meter traveled each axis gains
/// N(0, sigma_xy^2) and the heading N(0, sigma_theta^2).
struct DriftModel {
  double sigma_xy = 0.01;
  double sigma_theta = 0.005;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimParams {
  double speed = 0.8;            // m/s
  double grasp_tolerance = 0.03;  // m
  double drift_step = 0.05;       // m of travel per drift increment
  double battery_per_meter = 0.05;
  double battery_per_second = 0.002;
};

struct SimEvent {
  double time = 0.0;  // simulated seconds
  MissionPhase phase = MissionPhase::idle;
  std::string tag;
  Pose2 pose;  // true pose
  std::string detail;
};

/// One JSON object per line.
std::string to_json_line(const SimEvent& event);
SimEvent parse_event_line(const std::string& line);
void write_event_log(std::ostream& out, const std::vector<SimEvent>& events);

/// Kinematic robot in a static world given by a scene bundle. Objects keep a
/// true rigid transform relative to their scanned cloud. The odometry error
/// is the world transform E with odom = E * true; localize() resets E.
///
/// Single owner; not thread-safe. snapshot() returns a copy.
class RobotSim {
 public:
  /// `static_tree` may be shared between sims over the same bundle; built when null.
  RobotSim(std::shared_ptr<const SceneBundle> bundle, DriftModel drift = {}, SimParams params = {},
           std::shared_ptr<const KdTree> static_tree = nullptr);

  const RobotState& state() const { return state_; }
  RobotState snapshot() const { return state_; }
  const SimParams& params() const { return params_; }
  double time() const { return time_; }
  const std::vector<SimEvent>& events() const { return events_; }
  std::vector<SimEvent> take_events();

  /// Phase change with transition check. Throws illegal_command.
  void set_phase(MissionPhase phase, const std::string& detail = "");
  /// Emits a tagged event at the current time and pose.
  void emit(const std::string& tag, const std::string& detail = "");

  /// Starts following `waypoints` (odometry frame). Legal in the navigation
  /// phases and returning. Throws illegal_command, invalid_argument.
  /// With `final_heading` (odometry frame) the robot turns in place at the end.
  void start_path(std::vector<Vec2> waypoints, std::optional<double> final_heading = std::nullopt);
  bool path_active() const { return path_.size() >= 2; }
  /// Abandons the active path where the robot stands.
  void stop_path();
  /// Advances the active path by dt seconds (no-op otherwise) and returns
  /// the time actually spent moving.
  double step(double dt);
  /// start_path followed by steps until the end; returns elapsed seconds.
  double follow_path(std::vector<Vec2> waypoints, std::optional<double> final_heading = std::nullopt);
  /// Drives only `fraction` of the path, then stops (used for injected collisions).
  double follow_partial(std::vector<Vec2> waypoints, double fraction);
  /// Advances the clock without motion.
  void wait(double seconds);

  /// Puts the camera/gripper at `target` (odometry frame).
  void move_arm(const Vec3& target);
  /// Closes the gripper at `target` (odometry frame). `grasp_point` is given
  /// in the object's scanned frame; the object is attached iff the gripper
  /// lands within grasp_tolerance of where that point truly is now. Returns
  /// true on attachment; emits "empty_grasp" otherwise. Throws
  /// illegal_command while carrying or outside the grasping phase.
  bool grasp_at(const Vec3& target, int object_id, const Vec3& grasp_point);
  /// Sets the carried object down so its placement reference lands at `point`
  /// (odometry frame), opens the gripper. Throws illegal_command when
  /// nothing is carried or outside placing.
  void release_at(const Vec3& point);
  /// Drops whatever is carried where it is (abort path).
  void drop_carried();
  /// Resets the odometry error.
  void localize();

  /// Points of the true world within `radius` of the arm's true position,
  /// expressed in the odometry frame, plus isotropic Gaussian noise. A
  /// nonzero `max_points` thins the hits by an even stride first (sensor
  /// resolution). Throws illegal_command without an arm target, empty_capture.
  PointCloud capture_local_cloud(double radius, double noise_sigma, std::size_t max_points = 0);

  /// Clamps into [0, max_extension]. Throws invalid_argument on unknown id.
  double set_drawer(int drawer_id, double target_opening);
  const std::vector<DrawerModel>& drawers() const { return drawers_; }

  /// Current world transform of an object relative to its scanned cloud.
  const RigidTransform& object_transform(int id) const;
  /// Placement reference (base point) of the object in its current pose.
  Vec3 object_position(int id) const;

  /// Forces an odometry error (odom = error * true). Test hook.
  void set_odometry_error(const RigidTransform& error);
  const RigidTransform& odometry_error() const { return error_; }

  /// Restores robot, objects and drawers to the bundle state; clock and
  /// event log restart at zero. Reseeds the drift walk.
  void reset(std::uint64_t drift_seed);
  /// Robot back at start with a fresh odometry but objects kept in place.
  void reset_robot();

 private:
  Vec3 to_true(const Vec3& odom_point) const;
  Vec3 to_odom(const Vec3& true_point) const;
  void drift(double ds);
  void update_odom();
  void drain(double meters, double seconds);
  void carry_update();

  std::shared_ptr<const SceneBundle> bundle_;
  DriftModel drift_model_;
  SimParams params_;
  std::mt19937_64 rng_;
  RobotState state_;
  RigidTransform error_;
  double time_ = 0.0;
  std::vector<SimEvent> events_;
  std::vector<RigidTransform> object_tf_;
  std::vector<DrawerModel> drawers_;
  // Path in progress (odometry frame) and distance covered along it.
  std::vector<Vec2> path_;
  std::size_t path_segment_ = 0;
  double segment_progress_ = 0.0;
  double undrifted_ = 0.0;
  // Carried object pose relative to the true body frame.
  RigidTransform carry_offset_;
  std::optional<double> final_heading_;
  std::shared_ptr<const KdTree> static_tree_;
};

}  // namespace dollhouse
