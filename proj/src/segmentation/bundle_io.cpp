#include "dollhouse/segmentation/bundle_io.hpp"

#include <fstream>
#include <string>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/ply.hpp"
#include "json.hpp"

namespace dollhouse {
namespace {

using json = nlohmann::json;

json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 to_vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::string object_file(int id) { return "object_" + std::to_string(id) + ".ply"; }

}  // namespace

void save_bundle(const SceneBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_failure, "cannot create " + dir.string() + ": " + ec.message());

  json j;
  j["format"] = "dollhouse-bundle";
  j["version"] = 1;
  j["floor_height"] = bundle.floor_height;
  j["workspace"]["polygon"] = json::array();
  for (const auto& p : bundle.workspace.polygon) j["workspace"]["polygon"].push_back({p.x(), p.y()});
  j["workspace"]["z_min"] = bundle.workspace.z_min;
  j["workspace"]["z_max"] = bundle.workspace.z_max;
  j["robot_start"] = {{"x", bundle.robot_start.x}, {"y", bundle.robot_start.y}, {"theta", bundle.robot_start.theta}};
  j["static_cloud"] = "static.ply";
  j["objects"] = json::array();
  for (const auto& o : bundle.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"label", o.label},
                            {"movable", o.movable},
                            {"origin_pose", vec(o.origin_pose)},
                            {"aabb", {{"min", vec(o.aabb.min)}, {"max", vec(o.aabb.max)}}},
                            {"points", o.cloud.size()},
                            {"cloud", object_file(o.id)}});
    save_ply(o.cloud, dir / object_file(o.id));
  }
  j["drawers"] = json::array();
  for (const auto& d : bundle.drawers) {
    j["drawers"].push_back({{"id", d.id},
                            {"anchor", vec(d.anchor)},
                            {"slide_axis", vec(d.slide_axis)},
                            {"max_extension", d.max_extension},
                            {"opening", d.opening}});
  }
  j["supports"] = json::array();
  for (const auto& s : bundle.supports) {
    j["supports"].push_back({{"name", s.name}, {"min", vec(s.top.min)}, {"max", vec(s.top.max)}});
  }
  j["manual_overrides"] = json::array();
  save_ply(bundle.static_cloud, dir / "static.ply");

  std::ofstream out(dir / "bundle.json");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + (dir / "bundle.json").string());
}

SceneBundle load_bundle(const std::filesystem::path& dir) {
  const auto path = dir / "bundle.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  SceneBundle b;
  try {
    const json j = json::parse(in);
    b.floor_height = j.at("floor_height").get<double>();
    const auto& ws = j.at("workspace");
    for (const auto& p : ws.at("polygon")) b.workspace.polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    b.workspace.z_min = ws.at("z_min").get<double>();
    b.workspace.z_max = ws.at("z_max").get<double>();
    if (j.contains("robot_start")) {
      const auto& r = j["robot_start"];
      b.robot_start = {r.at("x").get<double>(), r.at("y").get<double>(), r.at("theta").get<double>()};
    }
    b.static_cloud = load_ply(dir / j.value("static_cloud", std::string("static.ply")));
    for (const auto& o : j.at("objects")) {
      const int id = o.at("id").get<int>();
      PointCloud cloud = load_ply(dir / o.value("cloud", object_file(id)));
      cloud.labels.clear();
      b.objects.push_back(make_instance(id, o.at("label").get<std::string>(), std::move(cloud),
                                        o.value("movable", true)));
    }
    for (const auto& d : j.value("drawers", json::array())) {
      DrawerModel m;
      m.id = d.at("id").get<int>();
      m.anchor = to_vec3(d.at("anchor"));
      m.slide_axis = to_vec3(d.at("slide_axis")).normalized();
      m.max_extension = d.at("max_extension").get<double>();
      m.opening = d.value("opening", 0.0);
      b.drawers.push_back(m);
    }
    for (const auto& s : j.value("supports", json::array())) {
      b.supports.push_back(SupportSurface{s.at("name").get<std::string>(), Aabb{to_vec3(s.at("min")), to_vec3(s.at("max"))}});
    }
    for (const auto& ov : j.value("manual_overrides", json::array())) {
      const int id = ov.at("id").get<int>();
      if (id < 0 || id >= static_cast<int>(b.objects.size())) {
        throw Error(ErrorKind::bundle_mismatch, "manual override names unknown object " + std::to_string(id));
      }
      auto& obj = b.objects[static_cast<std::size_t>(id)];
      obj.label = ov.value("label", obj.label);
      obj.movable = ov.value("movable", obj.movable);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_file, path.string() + ": " + e.what());
  }
  b.validate();
  return b;
}

}  // namespace dollhouse
