#include "dollhouse/server/service.hpp"

#include <algorithm>
#include <cmath>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/ply.hpp"
#include "dollhouse/scene/voxel.hpp"
#include "dollhouse/segmentation/bundle_io.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json aabb_json(const Aabb& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }
json pose_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

json error_body(std::string_view tag, const std::string& message) {
  return {{"error", std::string(tag)}, {"message", message}};
}

MissionService::Reply bad_request(const std::string& message) { return {400, error_body("invalid_request", message)}; }

MissionService::Reply no_bundle() { return {503, error_body("no_bundle", "no scene bundle loaded")}; }

std::optional<json> parse_body(const std::string& body, bool allow_empty) {
  if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(body);
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::optional<Vec3> vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) return std::nullopt;
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) return std::nullopt;
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) return std::nullopt;
  return v;
}

/// Voxel-downsamples every cloud with one shared voxel size, growing it until
/// the total fits the budget.
std::pair<PointCloud, std::vector<PointCloud>> previews(const SceneBundle& b, std::size_t budget) {
  std::size_t total = b.static_cloud.size();
  for (const auto& o : b.objects) total += o.cloud.size();
  if (total <= budget) {
    std::vector<PointCloud> objects;
    for (const auto& o : b.objects) objects.push_back(o.cloud);
    return {b.static_cloud, objects};
  }
  for (double voxel = 0.005;; voxel *= 1.25) {
    PointCloud s = voxel_downsample(b.static_cloud, voxel);
    std::vector<PointCloud> objects;
    std::size_t n = s.size();
    for (const auto& o : b.objects) {
      objects.push_back(voxel_downsample(o.cloud, voxel));
      n += objects.back().size();
    }
    if (n <= budget) return {std::move(s), std::move(objects)};
  }
}

}  // namespace

json to_json(const MissionStatus& s) {
  json j{{"phase", std::string(to_string(s.phase))},
         {"active_request", s.active_request ? json(*s.active_request) : json(nullptr)},
         {"battery", s.battery},
         {"robot_pose", pose_json(s.robot_pose)},
         {"message", s.message},
         {"last_result", nullptr}};
  if (s.last_result) {
    j["last_result"] = {{"request_id", s.last_result->request_id},
                        {"outcome", std::string(to_string(s.last_result->outcome))},
                        {"failure_tag", s.last_result->failure_tag ? json(*s.last_result->failure_tag) : json(nullptr)}};
  }
  return j;
}

std::shared_ptr<const SceneBundle> try_load_bundle(const std::filesystem::path& dir, std::string* reason) {
  try {
    return std::make_shared<const SceneBundle>(load_bundle(dir));
  } catch (const Error& e) {
    if (reason) *reason = e.what();
    return nullptr;
  }
}

const std::vector<std::string>& highlight_palette() {
  static const std::vector<std::string> palette{"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                                                "#42d4f4", "#f032e6", "#bfef45", "#9a6324", "#469990"};
  return palette;
}

MissionService::MissionService(ServerConfig config, std::shared_ptr<const SceneBundle> bundle)
    : config_(std::move(config)), bundle_(std::move(bundle)) {
  status_.message = bundle_ ? "idle" : "no scene bundle loaded";
  if (bundle_) {
    model_ = std::make_unique<SceneModel>(bundle_, config_.mission.planner);
    executor_ = std::make_unique<MissionExecutor>(*model_, config_.mission);
    DriftModel drift = config_.mission.drift;
    drift.seed = config_.seed;
    sim_ = std::make_unique<RobotSim>(bundle_, drift, config_.mission.sim, model_->static_tree());
    std::tie(static_preview_, object_previews_) = previews(*bundle_, config_.max_cloud_points);
    offsets_.assign(bundle_->objects.size(), Vec3::Zero());
    drawers_ = bundle_->drawers;
    status_.robot_pose = sim_->state().odom_pose;
    status_.battery = sim_->state().battery;
  }
  worker_ = std::thread([this] { worker_loop(); });
}

MissionService::~MissionService() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

MissionService::Reply MissionService::command(const std::string& body) {
  if (!bundle_) return no_bundle();
  const auto j = parse_body(body, false);
  if (!j) return bad_request("body must be a JSON object");
  if (!j->contains("request_id") || !j->at("request_id").is_string() || j->at("request_id").get<std::string>().empty()) {
    return bad_request("request_id must be a non-empty string");
  }
  const std::string request_id = j->at("request_id").get<std::string>();
  if (j->contains("type") && !j->at("type").is_string()) return bad_request("type must be a string");
  const std::string type = j->value("type", j->contains("drawer_id") ? "drawer" : "pick_place");

  Job job;
  job.request_id = request_id;
  std::optional<Vec3> drop;
  if (type == "pick_place") {
    if (!j->contains("object_id") || !j->at("object_id").is_number_integer()) {
      return bad_request("object_id must be an integer");
    }
    const int id = j->at("object_id").get<int>();
    if (id < 0 || id >= static_cast<int>(bundle_->objects.size())) return bad_request("unknown object_id");
    if (!bundle_->objects[id].movable) return bad_request("object is not movable");
    drop = j->contains("drop_point") ? vec_from(j->at("drop_point")) : std::nullopt;
    if (!drop) return bad_request("drop_point must be [x, y, z]");
    job.missions.push_back({id, *drop, request_id});
  } else if (type == "drawer") {
    if (!j->contains("drawer_id") || !j->at("drawer_id").is_number_integer()) {
      return bad_request("drawer_id must be an integer");
    }
    const int id = j->at("drawer_id").get<int>();
    if (std::none_of(bundle_->drawers.begin(), bundle_->drawers.end(), [&](const auto& d) { return d.id == id; })) {
      return bad_request("unknown drawer_id");
    }
    if (!j->contains("target_opening") || !j->at("target_opening").is_number() ||
        !std::isfinite(j->at("target_opening").get<double>())) {
      return bad_request("target_opening must be a number");
    }
    job.drawer = DrawerCommand{id, j->at("target_opening").get<double>(), request_id};
  } else {
    return bad_request("unknown command type '" + type + "'");
  }

  std::unique_lock lock(mutex_);
  if (std::find(seen_ids_.begin(), seen_ids_.end(), request_id) != seen_ids_.end()) {
    return bad_request("request_id already used");
  }
  if (busy_) return {409, error_body("busy", "a mission is active")};
  if (drop) {
    // The worker is idle, so the model is not being written.
    const auto [verdict, snapped] = executor_->check_drop(*drop);
    if (verdict != Verdict::ok) {
      return {422, {{"verdict", std::string(to_string(verdict))}, {"snapped_drop", vec_json(snapped)}}};
    }
  }
  lock.unlock();
  return accept(std::move(job));
}

MissionService::Reply MissionService::reset(const std::string& body) {
  if (!bundle_) return no_bundle();
  const auto j = parse_body(body, true);
  if (!j) return bad_request("body must be a JSON object");
  std::unique_lock lock(mutex_);
  std::string request_id;
  if (j->contains("request_id")) {
    if (!j->at("request_id").is_string()) return bad_request("request_id must be a string");
    request_id = j->at("request_id").get<std::string>();
    if (std::find(seen_ids_.begin(), seen_ids_.end(), request_id) != seen_ids_.end()) {
      return bad_request("request_id already used");
    }
  } else {
    do {
      request_id = "reset-" + std::to_string(++reset_counter_);
    } while (std::find(seen_ids_.begin(), seen_ids_.end(), request_id) != seen_ids_.end());
  }
  if (busy_) return {409, error_body("busy", "a mission is active")};
  Job job;
  job.request_id = request_id;
  job.composite = true;
  for (std::size_t id = 0; id < offsets_.size(); ++id) {
    if (offsets_[id].norm() > 0.01) {
      const int i = static_cast<int>(id);
      job.missions.push_back({i, bundle_->objects[id].origin_pose, request_id + "/" + std::to_string(i)});
    }
  }
  lock.unlock();
  return accept(std::move(job));
}

MissionService::Reply MissionService::accept(Job job) {
  json body{{"request_id", job.request_id}};
  if (job.composite) {
    json ids = json::array();
    for (const auto& m : job.missions) ids.push_back(m.object_id);
    body["missions"] = ids;
  }
  {
    std::lock_guard lock(mutex_);
    // Re-checked: another request may have been accepted since validation.
    if (busy_) return {409, error_body("busy", "a mission is active")};
    busy_ = true;
    seen_ids_.push_back(job.request_id);
    queue_.push_back(std::move(job));
  }
  cv_.notify_all();
  return {202, body};
}

MissionService::Reply MissionService::status() const { return {200, to_json(status_snapshot())}; }

MissionStatus MissionService::status_snapshot() const {
  std::lock_guard lock(mutex_);
  return status_;
}

std::vector<MissionRecord> MissionService::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

bool MissionService::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return !busy_; });
}

json MissionService::object_json(int id, const Vec3& offset) const {
  const ObjectInstance& o = bundle_->objects[id];
  const Aabb box{o.aabb.min + offset, o.aabb.max + offset};
  return {{"id", id},
          {"label", o.label},
          {"movable", o.movable},
          {"origin_pose", vec_json(o.origin_pose)},
          {"current_pose", vec_json(o.origin_pose + offset)},
          {"aabb", aabb_json(box)},
          {"cloud", {{"uri", "/clouds/object_" + std::to_string(id) + ".ply"}, {"points", object_previews_[id].size()}}}};
}

MissionService::Reply MissionService::scene() const {
  if (!bundle_) return no_bundle();
  std::lock_guard lock(mutex_);
  json objects = json::array();
  for (std::size_t i = 0; i < offsets_.size(); ++i) objects.push_back(object_json(static_cast<int>(i), offsets_[i]));
  json drawers = json::array();
  for (const auto& d : drawers_) {
    drawers.push_back({{"id", d.id},
                       {"anchor", vec_json(d.anchor)},
                       {"slide_axis", vec_json(d.slide_axis)},
                       {"max_extension", d.max_extension},
                       {"opening", d.opening}});
  }
  json polygon = json::array();
  for (const auto& p : bundle_->workspace.polygon) polygon.push_back({p.x(), p.y()});
  json supports = json::array();
  for (const auto& s : bundle_->supports) supports.push_back({{"name", s.name}, {"top", aabb_json(s.top)}});
  return {200,
          {{"version", scene_version_},
           {"floor_height", bundle_->floor_height},
           {"workspace", {{"polygon", polygon}, {"z_min", bundle_->workspace.z_min}, {"z_max", bundle_->workspace.z_max}}},
           {"robot_start", pose_json(bundle_->robot_start)},
           {"static_cloud", {{"uri", "/clouds/static.ply"}, {"points", static_preview_.size()}}},
           {"objects", objects},
           {"drawers", drawers},
           {"supports", supports}}};
}

MissionService::Reply MissionService::items() const {
  if (!bundle_) return no_bundle();
  std::lock_guard lock(mutex_);
  json out = json::array();
  const auto& palette = highlight_palette();
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    const ObjectInstance& o = bundle_->objects[i];
    if (!o.movable) continue;
    out.push_back({{"object_id", o.id},
                   {"label", o.label},
                   {"aabb", aabb_json({o.aabb.min + offsets_[i], o.aabb.max + offsets_[i]})},
                   {"color", palette[i % palette.size()]}});
  }
  return {200, out};
}

std::optional<std::string> MissionService::cloud_ply(const std::string& name) const {
  if (!bundle_) return std::nullopt;
  if (name == "static") return serialize_ply(static_preview_);
  const std::string prefix = "object_";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string digits = name.substr(prefix.size());
  if (digits.empty() || digits.size() > 6 || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
    return std::nullopt;
  }
  const std::size_t id = std::stoul(digits);
  if (id >= object_previews_.size()) return std::nullopt;
  Vec3 offset;
  {
    std::lock_guard lock(mutex_);
    offset = offsets_[id];
  }
  PointCloud c = object_previews_[id];
  for (auto& p : c.points) p += offset;
  return serialize_ply(c);
}

void MissionService::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    run_job(job);
    {
      std::lock_guard lock(mutex_);
      busy_ = false;
    }
    cv_.notify_all();
  }
}

void MissionService::run_job(const Job& job) {
  if (job.drawer) {
    const double opening = sim_->set_drawer(job.drawer->drawer_id, job.drawer->target_opening);
    publish_scene();
    finish({job.request_id, Outcome::success, std::nullopt},
           job.request_id + ": drawer " + std::to_string(job.drawer->drawer_id) + " at " + std::to_string(opening));
    return;
  }
  if (job.composite) {
    for (const auto& d : bundle_->drawers) sim_->set_drawer(d.id, 0.0);
    publish_scene();
  }
  std::optional<std::string> first_failure;
  for (const auto& cmd : job.missions) {
    const MissionRecord r = run_mission(cmd, cmd.request_id);
    if (r.outcome == Outcome::failure && !first_failure) first_failure = r.failure_tag.value_or("failure");
  }
  if (job.composite) {
    finish({job.request_id, first_failure ? Outcome::failure : Outcome::success, first_failure},
           job.request_id + ": reset finished, " + std::to_string(job.missions.size()) + " mission(s)");
  }
}

MissionRecord MissionService::run_mission(const PickPlaceCommand& cmd, const std::string& active_id) {
  std::seed_seq seq{config_.seed, ++mission_counter_};
  std::mt19937_64 rng(seq);
  MissionHooks hooks;
  hooks.nav_tick = config_.nav_tick;
  hooks.on_update = [&](const RobotSim& sim) { publish_motion(sim, active_id); };
  hooks.pace = [&](double s) { pace(s); };
  MissionRecord r;
  try {
    r = executor_->execute(cmd, *sim_, rng, hooks);
  } catch (const Error& e) {
    // Only reachable on a broken invariant (the sim was not idle); report it
    // as a failed mission so the request still terminates.
    r.request_id = cmd.request_id;
    r.object_id = cmd.object_id;
    r.failure_tag = std::string(to_tag(e.kind()));
  }
  publish_scene();
  {
    std::lock_guard lock(mutex_);
    records_.push_back(r);
  }
  const std::string outcome = r.outcome == Outcome::success ? "success" : "failure (" + r.failure_tag.value_or("") + ")";
  finish({r.request_id, r.outcome, r.failure_tag}, r.request_id + ": " + outcome);
  return r;
}

void MissionService::publish_scene() {
  std::vector<Vec3> offsets;
  for (std::size_t i = 0; i < bundle_->objects.size(); ++i) offsets.push_back(model_->object_offset(static_cast<int>(i)));
  std::lock_guard lock(mutex_);
  offsets_ = std::move(offsets);
  drawers_ = sim_->drawers();
  ++scene_version_;
}

void MissionService::publish_motion(const RobotSim& sim, const std::string& active_id) {
  const RobotState& s = sim.state();
  std::lock_guard lock(mutex_);
  status_.phase = s.phase;
  status_.active_request = s.phase == MissionPhase::idle ? std::nullopt : std::optional<std::string>(active_id);
  status_.battery = s.battery;
  status_.robot_pose = s.odom_pose;
  status_.message = s.phase == MissionPhase::idle ? "idle" : active_id + ": " + std::string(to_string(s.phase));
}

void MissionService::finish(const LastResult& result, const std::string& message) {
  std::lock_guard lock(mutex_);
  status_.phase = MissionPhase::idle;
  status_.active_request.reset();
  status_.battery = sim_->state().battery;
  status_.robot_pose = sim_->state().odom_pose;
  status_.message = message;
  status_.last_result = result;
}

void MissionService::pace(double sim_seconds) {
  if (!(config_.time_scale > 0.0) || !(sim_seconds > 0.0)) return;
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, std::chrono::duration<double>(sim_seconds / config_.time_scale), [&] { return stop_; });
}

}  // namespace dollhouse
