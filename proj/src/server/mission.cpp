#include "dollhouse/server/mission.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;

struct Abort {
  std::string tag;
};

std::string key_of(std::initializer_list<double> values) {
  std::string out;
  char buf[32];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.5f;", v);
    out += buf;
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json transform_json(const RigidTransform& t) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) r.push_back({t.rotation(i, 0), t.rotation(i, 1), t.rotation(i, 2)});
  return {{"rotation", r}, {"translation", vec_json(t.translation)}};
}

RigidTransform transform_from(const json& j) {
  RigidTransform t;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) t.rotation(i, k) = j.at("rotation").at(i).at(k).get<double>();
  }
  t.translation = vec_from(j.at("translation"));
  return t;
}

}  // namespace

std::string_view to_string(Outcome outcome) { return outcome == Outcome::success ? "success" : "failure"; }

double MissionRecord::duration(MissionPhase phase) const {
  double total = 0.0;
  for (const auto& d : durations) {
    if (d.phase == phase) total += d.seconds;
  }
  return total;
}

double MissionRecord::total_duration() const {
  return ui_latency + duration(MissionPhase::planning) + duration(MissionPhase::navigating_to_object) +
         duration(MissionPhase::grasping) + duration(MissionPhase::navigating_to_destination) +
         duration(MissionPhase::placing);
}

json to_json(const MissionRecord& r) {
  json durations = json::array();
  for (const auto& d : r.durations) durations.push_back({{"phase", to_string(d.phase)}, {"seconds", d.seconds}});
  json j{{"request_id", r.request_id},
         {"object_id", r.object_id},
         {"label", r.label},
         {"outcome", to_string(r.outcome)},
         {"failure_tag", r.failure_tag ? json(*r.failure_tag) : json(nullptr)},
         {"durations", durations},
         {"ui_latency", r.ui_latency},
         {"drop_point", vec_json(r.drop_point)},
         {"planned_drop", vec_json(r.planned_drop)},
         {"snap_distance", r.snap_distance},
         {"final_position", r.final_position ? vec_json(*r.final_position) : json(nullptr)},
         {"drop_resolved", r.drop_resolved}};
  if (r.correction) j["correction"] = transform_json(*r.correction);
  if (r.odom_error) j["odom_error"] = transform_json(*r.odom_error);
  return j;
}

MissionRecord record_from_json(const json& j) {
  try {
    MissionRecord r;
    r.request_id = j.at("request_id").get<std::string>();
    r.object_id = j.at("object_id").get<int>();
    r.label = j.at("label").get<std::string>();
    const std::string outcome = j.at("outcome").get<std::string>();
    if (outcome != "success" && outcome != "failure") throw Error(ErrorKind::malformed_file, "bad outcome");
    r.outcome = outcome == "success" ? Outcome::success : Outcome::failure;
    if (!j.at("failure_tag").is_null()) r.failure_tag = j.at("failure_tag").get<std::string>();
    for (const auto& d : j.at("durations")) {
      const auto phase = parse_phase(d.at("phase").get<std::string>());
      if (!phase) throw Error(ErrorKind::malformed_file, "bad phase in record");
      r.durations.push_back({*phase, d.at("seconds").get<double>()});
    }
    r.ui_latency = j.at("ui_latency").get<double>();
    r.drop_point = vec_from(j.at("drop_point"));
    r.planned_drop = vec_from(j.at("planned_drop"));
    r.snap_distance = j.at("snap_distance").get<double>();
    if (!j.at("final_position").is_null()) r.final_position = vec_from(j.at("final_position"));
    r.drop_resolved = j.value("drop_resolved", "");
    if (j.contains("correction")) r.correction = transform_from(j.at("correction"));
    if (j.contains("odom_error")) r.odom_error = transform_from(j.at("odom_error"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_file, std::string("bad mission record: ") + e.what());
  }
}

SceneModel::SceneModel(std::shared_ptr<const SceneBundle> bundle, const PlannerConfig& planner)
    : bundle_(std::move(bundle)) {
  if (!bundle_) throw Error(ErrorKind::invalid_argument, "SceneModel needs a bundle");
  static_tree_ = std::make_shared<const KdTree>(bundle_->static_cloud);
  occupancy_ = std::make_unique<OccupancyGrid>(build_occupancy_grid(bundle_->static_cloud, bundle_->floor_height,
                                                                    planner.band_min, planner.band_max,
                                                                    planner.grid_resolution, planner.inflation));
  offsets_.assign(bundle_->objects.size(), Vec3::Zero());
  for (const auto& o : bundle_->objects) clouds_.push_back(o.cloud);
}

const PointCloud& SceneModel::object_cloud(int id) const {
  if (id < 0 || id >= static_cast<int>(clouds_.size())) throw Error(ErrorKind::invalid_argument, "unknown object id");
  return clouds_[id];
}

Vec3 SceneModel::object_position(int id) const { return bundle_->objects.at(id).origin_pose + object_offset(id); }

Vec3 SceneModel::object_offset(int id) const {
  if (id < 0 || id >= static_cast<int>(offsets_.size())) throw Error(ErrorKind::invalid_argument, "unknown object id");
  return offsets_[id];
}

std::string SceneModel::state_key() const {
  std::string key;
  for (const auto& o : offsets_) {
    for (int i = 0; i < 3; ++i) key += std::to_string(std::llround(o[i] * 1e6)) + ",";
  }
  return key;
}

bool SceneModel::displaced(int id, double tol) const { return object_offset(id).norm() > tol; }

void SceneModel::move_object(int id, const Vec3& position) {
  const Vec3 offset = position - bundle_->objects.at(id).origin_pose;
  const Vec3 delta = offset - offsets_.at(id);
  for (auto& p : clouds_[id].points) p += delta;
  offsets_[id] = offset;
  ++version_;
}

void SceneModel::restore_object(int id) { move_object(id, bundle_->objects.at(id).origin_pose); }

PointCloud SceneModel::crop(const Vec3& center, double radius) const {
  PointCloud out;
  for (auto i : static_tree_->radius_search(center, radius)) out.points.push_back(static_tree_->point(i));
  for (const auto& c : clouds_) {
    for (const auto& p : c.points) {
      if ((p - center).squaredNorm() <= radius * radius) out.points.push_back(p);
    }
  }
  return out;
}

Vec3 SceneModel::snap_to_support(const Vec3& p, double max_drop) const {
  std::optional<double> best;
  auto consider = [&](double h) {
    const double drop = p.z() - h;
    if (drop >= -1e-9 && drop <= max_drop && (!best || h > *best)) best = h;
  };
  consider(bundle_->floor_height);
  for (const auto& s : bundle_->supports) {
    const Aabb& top = s.top;
    if (p.x() >= top.min.x() && p.x() <= top.max.x() && p.y() >= top.min.y() && p.y() <= top.max.y()) {
      consider(top.max.z());
    }
  }
  return best ? Vec3(p.x(), p.y(), *best) : p;
}

struct MissionExecutor::ObjectCache {
  struct Plan {
    BodyGraspPlan body;
    std::shared_ptr<const IcpTarget> crop;
  };
  std::optional<std::vector<GraspCandidate>> candidates;
  std::optional<Error> candidate_error;
  std::map<std::string, Plan> plans;
};

MissionExecutor::MissionExecutor(SceneModel& model, MissionConfig config) : model_(model), config_(std::move(config)) {
  config_.failures.validate();
}

MissionExecutor::StateCache& MissionExecutor::state_cache() {
  constexpr std::size_t kMaxStates = 64;
  const std::string key = model_.state_key();
  if (caches_.size() >= kMaxStates && !caches_.count(key)) caches_.clear();
  return caches_[key];
}

std::pair<Verdict, Vec3> MissionExecutor::check_drop(const Vec3& drop_point) const {
  const Vec3 snapped = model_.snap_to_support(drop_point, config_.planner.snap_distance);
  return {check_operational_area(snapped, model_.bundle().workspace, model_.occupancy()), snapped};
}

MissionRecord MissionExecutor::execute(const PickPlaceCommand& cmd, RobotSim& sim, std::mt19937_64& rng,
                                       const MissionHooks& hooks) {
  const SceneBundle& bundle = model_.bundle();
  if (cmd.object_id < 0 || cmd.object_id >= static_cast<int>(bundle.objects.size())) {
    throw Error(ErrorKind::invalid_argument, "unknown object id");
  }
  if (sim.state().phase != MissionPhase::idle) throw Error(ErrorKind::illegal_command, "robot is busy");
  const int id = cmd.object_id;
  const PlannerConfig& pc = config_.planner;
  const std::string& label = bundle.objects[id].label;

  MissionRecord rec;
  rec.request_id = cmd.request_id;
  rec.object_id = id;
  rec.label = label;
  rec.drop_point = cmd.drop_point;

  // Every random draw happens here, so the stream does not depend on where
  // the mission stops.
  const TimingConfig& tc = config_.timing;
  const double lat_localize = tc.localizing.sample(rng);
  const double lat_plan = tc.planning.sample(rng);
  const double lat_grasp = tc.grasping.sample(rng);
  const double lat_place = tc.placing.sample(rng);
  rec.ui_latency = tc.ui.sample(rng);
  const auto fail_nav = roll_failures(config_.failures, label, MissionPhase::navigating_to_object, rng);
  const auto fail_grasp = roll_failures(config_.failures, label, MissionPhase::grasping, rng);
  const auto fail_dest = roll_failures(config_.failures, label, MissionPhase::navigating_to_destination, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double hit_nav = unit(rng);
  const double hit_dest = unit(rng);

  const double t0 = sim.time();
  MissionPhase current = MissionPhase::idle;
  double phase_start = t0;
  auto update = [&] {
    if (hooks.on_update) hooks.on_update(sim);
  };
  auto close_phase = [&] {
    if (current != MissionPhase::idle) rec.durations.push_back({current, sim.time() - phase_start});
  };
  auto enter = [&](MissionPhase p) {
    close_phase();
    sim.set_phase(p);
    current = p;
    phase_start = sim.time();
    update();
  };
  auto check_timeout = [&] {
    if (sim.time() - t0 > config_.timeout) throw Abort{"timeout"};
  };
  auto wait = [&](double s) {
    sim.wait(s);
    if (hooks.pace) hooks.pace(s);
    update();
    check_timeout();
  };
  auto drive = [&](const std::vector<Vec2>& path, std::optional<double> heading, double fraction) {
    const double limit = fraction * path_length(path) / sim.params().speed;
    sim.start_path(path, fraction < 1.0 ? std::nullopt : heading);
    double spent = 0.0;
    while (sim.path_active()) {
      double dt = hooks.nav_tick > 0.0 ? hooks.nav_tick : std::numeric_limits<double>::max() / 4.0;
      if (fraction < 1.0) dt = std::min(dt, limit - spent);
      if (!(dt > 0.0)) {
        sim.stop_path();
        break;
      }
      const double e = sim.step(dt);
      spent += e;
      if (hooks.pace) hooks.pace(e);
      update();
      check_timeout();
    }
  };
  auto plan_route = [&](const Vec2& from, const Vec2& to) {
    RrtParams p = pc.rrt;
    return rrt_plan(model_.occupancy(), from, to, p).waypoints;
  };

  std::future<DropPlan> drop_future;
  std::optional<DropPlan> drop_plan;
  std::string drop_key;
  try {
    enter(MissionPhase::localizing);
    sim.localize();
    wait(lat_localize);

    enter(MissionPhase::planning);
    const auto [verdict, drop] = check_drop(cmd.drop_point);
    rec.planned_drop = drop;
    rec.snap_distance = (cmd.drop_point - drop).norm();
    if (verdict != Verdict::ok) throw Abort{std::string(to_string(verdict))};
    const Pose2 start = sim.state().odom_pose;
    StateCache& cache = state_cache();
    auto& slot = cache.objects[id];
    if (!slot) slot = std::make_shared<ObjectCache>();
    ObjectCache& oc = *slot;
    if (!oc.candidates && !oc.candidate_error) {
      try {
        oc.candidates = generate_grasp_candidates(model_.object_cloud(id), pc.gripper, pc.n_rotations, pc.grasp_seed,
                                                  pc.grasp);
      } catch (const Error& e) {
        oc.candidate_error = e;
      }
    }
    if (oc.candidate_error) throw *oc.candidate_error;
    const std::string start_key = key_of({start.x, start.y, start.theta});
    auto plan_it = oc.plans.find(start_key);
    if (plan_it == oc.plans.end()) {
      ObjectCache::Plan plan;
      plan.body = joint_optimize(*oc.candidates, model_.occupancy(), pc.robot, pc.weights, pc.pose_grid,
                                 start.position());
      plan.body.path_to_object = plan_route(start.position(), plan.body.body_pose.position());
      plan.crop = std::make_shared<const IcpTarget>(
          model_.crop(plan.body.grasp.position, pc.capture_radius + pc.crop_margin).points, pc.icp.normal_neighbors);
      plan_it = oc.plans.emplace(start_key, std::move(plan)).first;
    }
    const ObjectCache::Plan& plan = plan_it->second;

    drop_key = key_of({drop.x(), drop.y(), drop.z(), start.x, start.y});
    if (const auto it = cache.drops.find(drop_key); it != cache.drops.end()) {
      drop_plan = it->second;
    } else {
      const auto policy = config_.parallel_drop ? std::launch::async : std::launch::deferred;
      drop_future = std::async(policy, [this, drop = drop, from = start.position()] {
        const PlannerConfig& p = config_.planner;
        return optimize_drop(drop, model_.occupancy(), model_.bundle().workspace, p.robot, p.weights, p.pose_grid,
                             p.release_clearance, from);
      });
    }
    wait(lat_plan);

    enter(MissionPhase::navigating_to_object);
    if (fail_nav) {
      drive(plan.body.path_to_object, std::nullopt, hit_nav);
      throw Abort{std::string(to_tag(*fail_nav))};
    }
    drive(plan.body.path_to_object, plan.body.body_pose.theta, 1.0);

    // An infeasible drop that is already known stops the mission before the pick.
    if (drop_future.valid() &&
        drop_future.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
      try {
        drop_plan = drop_future.get();
      } catch (const Error& e) {
        rec.drop_resolved = "before_pick";
        throw Abort{std::string(to_tag(e.kind()))};
      }
    }

    enter(MissionPhase::grasping);
    if (hooks.on_grasp_start) hooks.on_grasp_start(sim);
    const Vec3 g = plan.body.grasp.position;
    if (fail_grasp == FailureMode::object_not_found) {
      sim.emit("object_not_found", "injected");
      throw Abort{"object_not_found"};
    }
    sim.move_arm(g);
    PointCloud capture;
    try {
      capture = sim.capture_local_cloud(pc.capture_radius, pc.capture_noise, pc.capture_points);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::empty_capture) throw Abort{"object_not_found"};
      throw;
    }
    rec.odom_error = sim.odometry_error();
    const IcpResult icp = icp_align(capture, *plan.crop, RigidTransform::identity(), pc.icp);
    rec.correction = icp.transform;
    const Vec3 corrected = invert(icp.transform)(g);
    sim.move_arm(corrected);
    if (fail_grasp) {
      sim.emit(std::string(to_tag(*fail_grasp)), "injected");
      throw Abort{std::string(to_tag(*fail_grasp))};
    }
    if (!sim.grasp_at(corrected, id, g - model_.object_offset(id))) throw Abort{"empty_grasp"};
    wait(lat_grasp);

    if (!drop_plan) {
      try {
        drop_plan = drop_future.get();
      } catch (const Error& e) {
        rec.drop_resolved = "after_grasp";
        throw Abort{std::string(to_tag(e.kind()))};
      }
    }
    cache.drops[drop_key] = *drop_plan;
    const auto to_drop = plan_route(sim.state().odom_pose.position(), drop_plan->body_pose.position());

    enter(MissionPhase::navigating_to_destination);
    if (fail_dest) {
      drive(to_drop, std::nullopt, hit_dest);
      throw Abort{std::string(to_tag(*fail_dest))};
    }
    drive(to_drop, drop_plan->body_pose.theta, 1.0);

    enter(MissionPhase::placing);
    sim.move_arm(drop_plan->release);
    sim.release_at(drop);
    wait(lat_place);
    model_.move_object(id, drop);
    rec.final_position = sim.object_position(id);

    enter(MissionPhase::returning);
    const Pose2 home = bundle.robot_start;
    drive(plan_route(sim.state().odom_pose.position(), home.position()), home.theta, 1.0);
    sim.localize();
    close_phase();
    sim.set_phase(MissionPhase::idle);
    current = MissionPhase::idle;
    rec.outcome = Outcome::success;
    update();
    return rec;
  } catch (const Abort& a) {
    rec.failure_tag = a.tag;
  } catch (const Error& e) {
    rec.failure_tag = std::string(e.kind() == ErrorKind::empty_capture ? "object_not_found" : to_tag(e.kind()));
  }
  sim.stop_path();
  sim.drop_carried();
  close_phase();
  sim.emit("failure", *rec.failure_tag);
  sim.set_phase(MissionPhase::idle);
  rec.outcome = Outcome::failure;
  update();
  return rec;
}

}  // namespace dollhouse
