#include "dollhouse/robotsim/robotsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "dollhouse/error.hpp"
#include "json.hpp"

namespace dollhouse {
namespace {

double yaw_of(const RigidTransform& t) { return std::atan2(t.rotation(1, 0), t.rotation(0, 0)); }

bool navigation_phase(MissionPhase p) {
  return p == MissionPhase::navigating_to_object || p == MissionPhase::navigating_to_destination ||
         p == MissionPhase::returning;
}

}  // namespace

void DriftModel::validate() const {
  if (!(sigma_xy >= 0.0) || !(sigma_theta >= 0.0)) throw Error(ErrorKind::invalid_spec, "drift sigmas must be >= 0");
}

std::string to_json_line(const SimEvent& e) {
  nlohmann::json j{{"t", e.time},
                   {"phase", to_string(e.phase)},
                   {"tag", e.tag},
                   {"pose", {e.pose.x, e.pose.y, e.pose.theta}},
                   {"detail", e.detail}};
  return j.dump();
}

SimEvent parse_event_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SimEvent e;
    e.time = j.at("t").get<double>();
    const auto phase = parse_phase(j.at("phase").get<std::string>());
    if (!phase) throw Error(ErrorKind::malformed_file, "unknown phase in event line");
    e.phase = *phase;
    e.tag = j.at("tag").get<std::string>();
    const auto& p = j.at("pose");
    e.pose = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    e.detail = j.value("detail", "");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::malformed_file, std::string("bad event line: ") + ex.what());
  }
}

void write_event_log(std::ostream& out, const std::vector<SimEvent>& events) {
  for (const auto& e : events) out << to_json_line(e) << '\n';
}

RobotSim::RobotSim(std::shared_ptr<const SceneBundle> bundle, DriftModel drift, SimParams params,
                   std::shared_ptr<const KdTree> static_tree)
    : bundle_(std::move(bundle)), drift_model_(drift), params_(params), static_tree_(std::move(static_tree)) {
  if (!bundle_) throw Error(ErrorKind::invalid_argument, "RobotSim needs a bundle");
  drift_model_.validate();
  if (!(params_.speed > 0.0) || !(params_.grasp_tolerance >= 0.0) || !(params_.drift_step > 0.0)) {
    throw Error(ErrorKind::invalid_spec, "invalid simulator parameters");
  }
  if (!static_tree_) static_tree_ = std::make_shared<const KdTree>(bundle_->static_cloud);
  reset(drift_model_.seed);
}

std::vector<SimEvent> RobotSim::take_events() { return std::exchange(events_, {}); }

void RobotSim::emit(const std::string& tag, const std::string& detail) {
  events_.push_back({time_, state_.phase, tag, state_.true_pose, detail});
}

void RobotSim::set_phase(MissionPhase phase, const std::string& detail) {
  if (!transition_allowed(state_.phase, phase)) {
    throw Error(ErrorKind::illegal_command, "phase " + std::string(to_string(state_.phase)) + " cannot move to " +
                                                std::string(to_string(phase)));
  }
  state_.phase = phase;
  if (phase == MissionPhase::idle) {
    path_.clear();
    state_.arm_target.reset();
  }
  emit("phase", detail.empty() ? std::string(to_string(phase)) : detail);
}

Vec3 RobotSim::to_true(const Vec3& odom_point) const { return invert(error_)(odom_point); }
Vec3 RobotSim::to_odom(const Vec3& true_point) const { return error_(true_point); }

void RobotSim::update_odom() {
  const Vec3 p = error_(Vec3(state_.true_pose.x, state_.true_pose.y, 0.0));
  state_.odom_pose = {p.x(), p.y(), wrap_angle(state_.true_pose.theta + yaw_of(error_))};
}

void RobotSim::drift(double ds) {
  if (drift_model_.sigma_xy == 0.0 && drift_model_.sigma_theta == 0.0) return;
  std::normal_distribution<double> n(0.0, 1.0);
  const double s = std::sqrt(ds);
  const double dx = drift_model_.sigma_xy * s * n(rng_);
  const double dy = drift_model_.sigma_xy * s * n(rng_);
  const double dth = drift_model_.sigma_theta * s * n(rng_);
  // Heading error pivots about the believed position, not the world origin.
  const Vec3 o(state_.odom_pose.x, state_.odom_pose.y, 0.0);
  const Vec3 shift = o - Mat3(Eigen::AngleAxisd(dth, Vec3::UnitZ())) * o + Vec3(dx, dy, 0.0);
  error_ = compose(RigidTransform::from_yaw(dth, shift), error_);
  update_odom();
}

void RobotSim::drain(double meters, double seconds) {
  state_.battery = std::max(0.0, state_.battery - params_.battery_per_meter * meters -
                                     params_.battery_per_second * seconds);
}

void RobotSim::carry_update() {
  if (!state_.carried_object) return;
  object_tf_[*state_.carried_object] = compose(to_transform(state_.true_pose), carry_offset_);
}

void RobotSim::start_path(std::vector<Vec2> waypoints, std::optional<double> final_heading) {
  if (!navigation_phase(state_.phase)) {
    throw Error(ErrorKind::illegal_command, "follow_path is not legal in phase " + std::string(to_string(state_.phase)));
  }
  if (waypoints.empty()) throw Error(ErrorKind::invalid_argument, "empty path");
  if (waypoints.size() == 1) waypoints.insert(waypoints.begin(), state_.odom_pose.position());
  path_ = std::move(waypoints);
  path_segment_ = 0;
  segment_progress_ = 0.0;
  final_heading_ = final_heading;
}

double RobotSim::step(double dt) {
  if (!path_active() || !(dt > 0.0)) return 0.0;
  double budget = dt * params_.speed;
  double moved = 0.0;
  // Motion is cut at fixed travel distances so the drift sequence does not
  // depend on how the caller slices time.
  while (budget > 0.0 && path_segment_ + 1 < path_.size()) {
    const Vec2 a = path_[path_segment_];
    const Vec2 b = path_[path_segment_ + 1];
    const double len = (b - a).norm();
    const double take = std::min({budget, len - segment_progress_, params_.drift_step - undrifted_});
    segment_progress_ += take;
    budget -= take;
    moved += take;
    if (len > 0.0) {
      const Vec2 dir = (b - a) / len;
      const Vec2 cmd = a + dir * segment_progress_;
      const Vec3 t = to_true(Vec3(cmd.x(), cmd.y(), 0.0));
      state_.true_pose = {t.x(), t.y(), wrap_angle(std::atan2(dir.y(), dir.x()) - yaw_of(error_))};
      update_odom();
    }
    undrifted_ += take;
    if (undrifted_ >= params_.drift_step - 1e-12) {
      drift(undrifted_);
      undrifted_ = 0.0;
    }
    carry_update();
    if (segment_progress_ >= len - 1e-12) {
      ++path_segment_;
      segment_progress_ = 0.0;
    }
  }
  const double elapsed = moved / params_.speed;
  time_ += elapsed;
  drain(moved, elapsed);
  if (path_segment_ + 1 >= path_.size()) {
    if (undrifted_ > 0.0) {
      drift(undrifted_);
      undrifted_ = 0.0;
    }
    if (final_heading_) state_.true_pose.theta = wrap_angle(*final_heading_ - yaw_of(error_));
    update_odom();
    carry_update();
    path_.clear();
    final_heading_.reset();
  }
  return elapsed;
}

double RobotSim::follow_path(std::vector<Vec2> waypoints, std::optional<double> final_heading) {
  start_path(std::move(waypoints), final_heading);
  double elapsed = 0.0;
  while (path_active()) elapsed += step(std::numeric_limits<double>::max() / (4.0 * params_.speed));
  return elapsed;
}

double RobotSim::follow_partial(std::vector<Vec2> waypoints, double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) total += (waypoints[i] - waypoints[i - 1]).norm();
  start_path(std::move(waypoints));
  const double elapsed = step(fraction * total / params_.speed);
  stop_path();
  return elapsed;
}

void RobotSim::stop_path() {
  if (undrifted_ > 0.0) {
    drift(undrifted_);
    undrifted_ = 0.0;
  }
  path_.clear();
  final_heading_.reset();
}

void RobotSim::wait(double seconds) {
  if (!(seconds > 0.0)) return;
  time_ += seconds;
  drain(0.0, seconds);
}

void RobotSim::move_arm(const Vec3& target) { state_.arm_target = target; }

bool RobotSim::grasp_at(const Vec3& target, int object_id, const Vec3& grasp_point) {
  if (state_.phase != MissionPhase::grasping) throw Error(ErrorKind::illegal_command, "grasp outside grasping phase");
  if (state_.carried_object) throw Error(ErrorKind::illegal_command, "grasp while carrying");
  if (object_id < 0 || object_id >= static_cast<int>(object_tf_.size())) {
    throw Error(ErrorKind::invalid_argument, "unknown object id");
  }
  state_.arm_target = target;
  state_.gripper = GripperState::closed;
  const Vec3 gripper = to_true(target);
  const double miss = (gripper - object_tf_[object_id](grasp_point)).norm();
  if (miss > params_.grasp_tolerance) {
    emit("empty_grasp", "miss " + std::to_string(miss));
    return false;
  }
  state_.carried_object = object_id;
  carry_offset_ = compose(invert(to_transform(state_.true_pose)), object_tf_[object_id]);
  emit("grasped", std::to_string(object_id));
  return true;
}

void RobotSim::release_at(const Vec3& point) {
  if (state_.phase != MissionPhase::placing) throw Error(ErrorKind::illegal_command, "release outside placing phase");
  if (!state_.carried_object) throw Error(ErrorKind::illegal_command, "release without a carried object");
  const int id = *state_.carried_object;
  const Vec3 shift = to_true(point) - object_position(id);
  object_tf_[id].translation += shift;
  state_.carried_object.reset();
  state_.gripper = GripperState::open;
  state_.arm_target.reset();
  emit("released", std::to_string(id));
}

void RobotSim::drop_carried() {
  if (!state_.carried_object) return;
  const int id = *state_.carried_object;
  object_tf_[id].translation.z() += bundle_->floor_height - object_position(id).z();
  state_.carried_object.reset();
  state_.gripper = GripperState::open;
  emit("dropped", std::to_string(id));
}

void RobotSim::localize() {
  error_ = RigidTransform::identity();
  undrifted_ = 0.0;
  update_odom();
  emit("localized");
}

PointCloud RobotSim::capture_local_cloud(double radius, double noise_sigma, std::size_t max_points) {
  if (!state_.arm_target) throw Error(ErrorKind::illegal_command, "capture without an arm target");
  const Vec3 center = to_true(*state_.arm_target);
  std::vector<Vec3> hits;
  for (auto i : static_tree_->radius_search(center, radius)) hits.push_back(static_tree_->point(i));
  const double r2 = radius * radius;
  for (std::size_t k = 0; k < bundle_->objects.size(); ++k) {
    const RigidTransform& tf = object_tf_[k];
    for (const auto& p : bundle_->objects[k].cloud.points) {
      const Vec3 w = tf(p);
      if ((w - center).squaredNorm() <= r2) hits.push_back(w);
    }
  }
  if (hits.empty()) throw Error(ErrorKind::empty_capture, "no points within capture radius");
  if (max_points > 0 && hits.size() > max_points) {
    std::vector<Vec3> kept;
    kept.reserve(max_points);
    for (std::size_t i = 0; i < max_points; ++i) kept.push_back(hits[i * hits.size() / max_points]);
    hits = std::move(kept);
  }
  PointCloud out;
  out.points.reserve(hits.size());
  std::normal_distribution<double> n(0.0, 1.0);
  for (const auto& w : hits) {
    Vec3 p = to_odom(w);
    if (noise_sigma > 0.0) p += noise_sigma * Vec3(n(rng_), n(rng_), n(rng_));
    out.points.push_back(p);
  }
  emit("captured", std::to_string(out.size()));
  return out;
}

double RobotSim::set_drawer(int drawer_id, double target_opening) {
  const auto it = std::find_if(drawers_.begin(), drawers_.end(), [&](const auto& d) { return d.id == drawer_id; });
  if (it == drawers_.end()) throw Error(ErrorKind::invalid_argument, "unknown drawer id");
  it->opening = std::isnan(target_opening) ? it->opening : std::clamp(target_opening, 0.0, it->max_extension);
  emit("drawer", std::to_string(drawer_id) + " " + std::to_string(it->opening));
  return it->opening;
}

const RigidTransform& RobotSim::object_transform(int id) const {
  if (id < 0 || id >= static_cast<int>(object_tf_.size())) throw Error(ErrorKind::invalid_argument, "unknown object id");
  return object_tf_[id];
}

Vec3 RobotSim::object_position(int id) const {
  const RigidTransform& tf = object_transform(id);
  // Base point of the moved cloud: only yaw rotations occur, so the base
  // point moves with the transform.
  return tf(bundle_->objects[id].origin_pose);
}

void RobotSim::set_odometry_error(const RigidTransform& error) {
  error_ = error;
  update_odom();
}

void RobotSim::reset(std::uint64_t drift_seed) {
  rng_.seed(drift_seed);
  object_tf_.assign(bundle_->objects.size(), RigidTransform::identity());
  drawers_ = bundle_->drawers;
  time_ = 0.0;
  events_.clear();
  state_ = RobotState{};
  reset_robot();
}

void RobotSim::reset_robot() {
  drop_carried();
  error_ = RigidTransform::identity();
  undrifted_ = 0.0;
  path_.clear();
  final_heading_.reset();
  state_.true_pose = bundle_->robot_start;
  state_.arm_target.reset();
  state_.gripper = GripperState::open;
  state_.phase = MissionPhase::idle;
  update_odom();
}

}  // namespace dollhouse
