#include "dollhouse/server/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.is_object() || !j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_spec, std::string("config field '") + key + "': " + e.what());
  }
}

void read_latency(const json& j, const char* key, Latency& out) {
  if (!j.is_object() || !j.contains(key)) return;
  const json& l = j.at(key);
  if (l.is_number()) {
    out.mean = l.get<double>();
  } else {
    read(l, "mean", out.mean);
    read(l, "cv", out.cv);
  }
  if (!(out.mean >= 0.0) || !(out.cv >= 0.0)) {
    throw Error(ErrorKind::invalid_spec, std::string("latency '") + key + "' must have mean, cv >= 0");
  }
}

FailureRates rates_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_spec, "failure rates must be an object");
  if (j.contains("success_rate")) {
    std::array<double, 5> shares{};
    if (!j.contains("shares") || !j.at("shares").is_object()) {
      throw Error(ErrorKind::invalid_spec, "calibrated failure entry needs a 'shares' object");
    }
    for (const auto& [tag, weight] : j.at("shares").items()) {
      const auto mode = parse_failure_mode(tag);
      if (!mode || !weight.is_number()) throw Error(ErrorKind::invalid_spec, "unknown failure share '" + tag + "'");
      shares[static_cast<std::size_t>(*mode)] = weight.get<double>();
    }
    return calibrate_rates(j.at("success_rate").get<double>(), shares);
  }
  FailureRates r;
  for (const auto& [tag, p] : j.items()) {
    const auto mode = parse_failure_mode(tag);
    if (!mode || !p.is_number()) throw Error(ErrorKind::invalid_spec, "unknown failure mode '" + tag + "'");
    r[*mode] = p.get<double>();
  }
  return r;
}

}  // namespace

double Latency::sample(std::mt19937_64& rng) const {
  if (mean <= 0.0) return 0.0;
  if (cv <= 0.0) return mean;
  const double s2 = std::log1p(cv * cv);
  std::lognormal_distribution<double> d(std::log(mean) - 0.5 * s2, std::sqrt(s2));
  return d(rng);
}

FailureConfig failure_config_from_json(const json& j) {
  FailureConfig cfg;
  if (j.is_null()) return cfg;
  if (j.contains("defaults")) cfg.defaults = rates_from_json(j.at("defaults"));
  if (j.contains("per_label")) {
    for (const auto& [label, entry] : j.at("per_label").items()) cfg.per_label[label] = rates_from_json(entry);
  }
  cfg.validate();
  return cfg;
}

MissionConfig mission_config_from_json(const json& j) {
  MissionConfig m;
  if (j.is_null()) return m;
  if (j.contains("planner")) {
    const json& p = j.at("planner");
    PlannerConfig& c = m.planner;
    read(p, "grid_resolution", c.grid_resolution);
    read(p, "inflation", c.inflation);
    read(p, "band_min", c.band_min);
    read(p, "band_max", c.band_max);
    read(p, "rrt_step", c.rrt.step);
    read(p, "rrt_goal_bias", c.rrt.goal_bias);
    read(p, "rrt_max_iterations", c.rrt.max_iterations);
    read(p, "rrt_seed", c.rrt.seed);
    read(p, "gripper_max_width", c.gripper.max_width);
    read(p, "friction_cone", c.grasp.friction_cone);
    read(p, "max_grasp_candidates", c.grasp.max_candidates);
    read(p, "n_rotations", c.n_rotations);
    read(p, "grasp_seed", c.grasp_seed);
    read(p, "reach", c.robot.reach);
    read(p, "body_radius", c.robot.body_radius);
    read(p, "shoulder_height", c.robot.shoulder_height);
    read(p, "weight_quality", c.weights.quality);
    read(p, "weight_alignment", c.weights.alignment);
    read(p, "weight_clearance", c.weights.clearance);
    read(p, "pose_headings", c.pose_grid.headings);
    read(p, "pose_radii", c.pose_grid.radii);
    read(p, "release_clearance", c.release_clearance);
    read(p, "snap_distance", c.snap_distance);
    read(p, "capture_radius", c.capture_radius);
    read(p, "capture_noise", c.capture_noise);
    read(p, "capture_points", c.capture_points);
    read(p, "crop_margin", c.crop_margin);
    read(p, "icp_max_iterations", c.icp.max_iterations);
    read(p, "icp_max_correspondence", c.icp.max_correspondence_dist);
    read(p, "icp_source_points", c.icp.max_source_points);
    if (p.contains("icp_metric")) {
      const std::string metric = p.at("icp_metric").get<std::string>();
      if (metric == "point_to_point") {
        c.icp.metric = IcpMetric::point_to_point;
      } else if (metric == "point_to_plane") {
        c.icp.metric = IcpMetric::point_to_plane;
      } else {
        throw Error(ErrorKind::invalid_spec, "icp_metric must be point_to_point or point_to_plane");
      }
    }
    if (!(c.grid_resolution > 0.0) || !(c.capture_radius > 0.0) || c.n_rotations < 1 || !(c.band_max > c.band_min)) {
      throw Error(ErrorKind::invalid_spec, "invalid planner configuration");
    }
  }
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    read_latency(t, "localizing", m.timing.localizing);
    read_latency(t, "planning", m.timing.planning);
    read_latency(t, "grasping", m.timing.grasping);
    read_latency(t, "placing", m.timing.placing);
    read_latency(t, "ui", m.timing.ui);
  }
  if (j.contains("failures")) m.failures = failure_config_from_json(j.at("failures"));
  if (j.contains("drift")) {
    const json& d = j.at("drift");
    read(d, "sigma_xy", m.drift.sigma_xy);
    read(d, "sigma_theta", m.drift.sigma_theta);
    m.drift.validate();
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    read(s, "speed", m.sim.speed);
    read(s, "grasp_tolerance", m.sim.grasp_tolerance);
    read(s, "battery_per_meter", m.sim.battery_per_meter);
    read(s, "battery_per_second", m.sim.battery_per_second);
    if (!(m.sim.speed > 0.0)) throw Error(ErrorKind::invalid_spec, "sim speed must be > 0");
  }
  read(j, "timeout", m.timeout);
  read(j, "parallel_drop", m.parallel_drop);
  return m;
}

ServerConfig server_config_from_json(const json& j) {
  ServerConfig c;
  read(j, "host", c.host);
  read(j, "port", c.port);
  std::string bundle;
  read(j, "bundle", bundle);
  if (!bundle.empty()) c.bundle = bundle;
  read(j, "time_scale", c.time_scale);
  read(j, "nav_tick", c.nav_tick);
  read(j, "seed", c.seed);
  read(j, "max_cloud_points", c.max_cloud_points);
  if (j.contains("mission")) c.mission = mission_config_from_json(j.at("mission"));
  if (c.port < 0 || c.port > 65535) throw Error(ErrorKind::invalid_spec, "port out of range");
  if (!(c.nav_tick > 0.0)) throw Error(ErrorKind::invalid_spec, "nav_tick must be > 0");
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_file, path.string() + ": " + e.what());
  }
}

ServerConfig load_server_config(const std::filesystem::path& path) {
  ServerConfig c = server_config_from_json(read_json_file(path));
  // Relative bundle paths are taken from the config file's directory.
  if (!c.bundle.empty() && c.bundle.is_relative()) c.bundle = path.parent_path() / c.bundle;
  return c;
}

}  // namespace dollhouse
