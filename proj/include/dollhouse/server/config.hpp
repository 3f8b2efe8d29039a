#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "dollhouse/planning/grasp.hpp"
#include "dollhouse/planning/pose_opt.hpp"
#include "dollhouse/planning/rrt.hpp"
#include "dollhouse/registration/icp.hpp"
#include "dollhouse/robotsim/failures.hpp"
#include "dollhouse/robotsim/robotsim.hpp"
#include "json.hpp"

namespace dollhouse {

/// Lognormal latency given by its mean and coefficient of variation.
/// A zero mean yields 0 without consuming randomness.
struct Latency {
  double mean = 0.0;
  double cv = 0.3;

  double sample(std::mt19937_64& rng) const;
};

/// Simulated durations of the stages that are not emergent from motion.
struct TimingConfig {
  Latency localizing{2.0, 0.2};
  Latency planning{17.0, 0.25};
  Latency grasping{21.0, 0.3};
  Latency placing{15.0, 0.3};
  Latency ui{10.0, 0.3};  // operator interaction, recorded but not simulated
};

struct PlannerConfig {
  double grid_resolution = 0.05;
  double inflation = 0.4;
  double band_min = 0.05;  // obstacle band above the floor
  double band_max = 1.2;
  RrtParams rrt;
  Gripper gripper;
  GraspParams grasp;
  int n_rotations = 8;
  std::uint64_t grasp_seed = 1;
  RobotModel robot;
  ScoreWeights weights;
  PoseGrid pose_grid;
  double release_clearance = 0.05;
  double snap_distance = 0.3;
  double capture_radius = 0.5;
  double capture_noise = 0.002;
  std::size_t capture_points = 1000;  // sensor resolution cap; 0 keeps every hit
  double crop_margin = 0.15;  // scene crop radius beyond the capture radius
  IcpParams icp{.metric = IcpMetric::point_to_plane};
};

/// Everything a mission needs besides the scene.
struct MissionConfig {
  PlannerConfig planner;
  TimingConfig timing;
  FailureConfig failures;
  DriftModel drift;
  SimParams sim;
  double timeout = 300.0;       // simulated seconds
  bool parallel_drop = true;    // run optimize_drop on another thread
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path bundle;
  double time_scale = 20.0;  // simulated seconds per wall second; <= 0 runs unpaced
  double nav_tick = 0.5;     // simulated seconds between status updates while driving
  std::uint64_t seed = 1;
  std::size_t max_cloud_points = 50000;
  MissionConfig mission;
};

/// JSON readers. Every field is optional and falls back to the defaults
/// above. Per-label failure entries take either explicit rates or
/// {"success_rate": r, "shares": {mode: weight}}. Throw invalid_spec.
FailureConfig failure_config_from_json(const nlohmann::json& j);
MissionConfig mission_config_from_json(const nlohmann::json& j);
ServerConfig server_config_from_json(const nlohmann::json& j);

/// Throws io_failure, malformed_file, invalid_spec.
nlohmann::json read_json_file(const std::filesystem::path& path);
ServerConfig load_server_config(const std::filesystem::path& path);

}  // namespace dollhouse
