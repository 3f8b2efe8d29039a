#include "dollhouse/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "json.hpp"

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;
constexpr double kFlat = 1e-9;

/// A sampled surface piece in its own frame, mapped to the world by `frame`.
struct Patch {
  enum class Kind { rect, disc, cylinder_side, sphere };
  Kind kind = Kind::rect;
  RigidTransform frame;
  double a = 0.0;  // rect: extent along local x | disc, cylinder, sphere: radius
  double b = 0.0;  // rect: extent along local y | cylinder: height
  int label = -1;
  int object = -1;  // owning object index, -1 for static geometry
  int part = -1;
  int support = -1;  // support id when this is a floor (-2) or furniture top

  double area() const {
    switch (kind) {
      case Kind::rect: return a * b;
      case Kind::disc: return kPi * a * a;
      case Kind::cylinder_side: return 2.0 * kPi * a * b;
      case Kind::sphere: return 4.0 * kPi * a * a;
    }
    return 0.0;
  }

  template <typename Rng>
  Vec3 sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 local;
    switch (kind) {
      case Kind::rect:
        local = Vec3((u(rng) - 0.5) * a, (u(rng) - 0.5) * b, 0.0);
        break;
      case Kind::disc: {
        const double r = a * std::sqrt(u(rng));
        const double t = 2.0 * kPi * u(rng);
        local = Vec3(r * std::cos(t), r * std::sin(t), 0.0);
        break;
      }
      case Kind::cylinder_side: {
        const double t = 2.0 * kPi * u(rng);
        local = Vec3(a * std::cos(t), a * std::sin(t), u(rng) * b);
        break;
      }
      case Kind::sphere: {
        const double z = 2.0 * u(rng) - 1.0;
        const double t = 2.0 * kPi * u(rng);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        local = a * Vec3(s * std::cos(t), s * std::sin(t), z);
        break;
      }
    }
    return frame(local);
  }

  double distance(const Vec3& world) const {
    const Vec3 p = invert(frame)(world);
    switch (kind) {
      case Kind::rect: {
        const double dx = std::max(std::abs(p.x()) - 0.5 * a, 0.0);
        const double dy = std::max(std::abs(p.y()) - 0.5 * b, 0.0);
        return std::sqrt(dx * dx + dy * dy + p.z() * p.z());
      }
      case Kind::disc: {
        const double dr = std::max(std::hypot(p.x(), p.y()) - a, 0.0);
        return std::hypot(dr, p.z());
      }
      case Kind::cylinder_side: {
        const double dr = std::hypot(p.x(), p.y()) - a;
        const double dz = p.z() < 0.0 ? -p.z() : std::max(p.z() - b, 0.0);
        return std::hypot(dr, dz);
      }
      case Kind::sphere: return std::abs(p.norm() - a);
    }
    return 0.0;
  }
};

RigidTransform face_frame(const Vec3& center, const Vec3& u, const Vec3& v) {
  RigidTransform t;
  t.rotation.col(0) = u;
  t.rotation.col(1) = v;
  t.rotation.col(2) = u.cross(v);
  t.translation = center;
  return t;
}

/// Faces of a base-centered box in `frame`. Bottom face only if requested.
void add_box(std::vector<Patch>& out, const RigidTransform& frame, const Vec3& s, bool bottom, Patch proto) {
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  auto face = [&](const Vec3& c, const Vec3& u, const Vec3& v, double a, double b) {
    Patch p = proto;
    p.kind = Patch::Kind::rect;
    p.frame = compose(frame, face_frame(c, u, v));
    p.a = a;
    p.b = b;
    out.push_back(p);
  };
  face({0, 0, s.z()}, X, Y, s.x(), s.y());
  if (bottom) face({0, 0, 0}, Y, X, s.y(), s.x());
  face({0.5 * s.x(), 0, 0.5 * s.z()}, Y, Z, s.y(), s.z());
  face({-0.5 * s.x(), 0, 0.5 * s.z()}, Z, Y, s.z(), s.y());
  face({0, 0.5 * s.y(), 0.5 * s.z()}, Z, X, s.z(), s.x());
  face({0, -0.5 * s.y(), 0.5 * s.z()}, X, Z, s.x(), s.z());
}

void add_cylinder(std::vector<Patch>& out, const RigidTransform& frame, const Vec3& s, bool bottom, Patch proto) {
  const double r = 0.5 * s.x();
  Patch side = proto;
  side.kind = Patch::Kind::cylinder_side;
  side.frame = frame;
  side.a = r;
  side.b = s.z();
  out.push_back(side);
  Patch top = proto;
  top.kind = Patch::Kind::disc;
  top.frame = compose(frame, RigidTransform::from_yaw(0.0, {0, 0, s.z()}));
  top.a = r;
  out.push_back(top);
  if (bottom) {
    Patch bot = top;
    bot.frame = compose(frame, RigidTransform::from_axis_angle(Vec3::UnitX(), kPi));
    out.push_back(bot);
  }
}

void add_sphere(std::vector<Patch>& out, const RigidTransform& frame, const Vec3& s, Patch proto) {
  Patch p = proto;
  p.kind = Patch::Kind::sphere;
  p.a = 0.5 * s.x();
  p.frame = compose(frame, RigidTransform::from_yaw(0.0, {0, 0, p.a}));
  out.push_back(p);
}

RigidTransform object_frame(const ObjectSpec& o) { return RigidTransform::from_yaw(o.yaw, o.position); }

RigidTransform part_frame(const ObjectSpec& o, const PrimitivePart& part) {
  return compose(object_frame(o), RigidTransform::from_yaw(0.0, part.offset));
}

/// Strictly inside a part (object frame coordinates of the part's base center frame).
bool inside_part(const PrimitivePart& part, const Vec3& local) {
  const Vec3& s = part.size;
  switch (part.shape) {
    case Shape::box:
      return std::abs(local.x()) < 0.5 * s.x() - kFlat && std::abs(local.y()) < 0.5 * s.y() - kFlat &&
             local.z() > kFlat && local.z() < s.z() - kFlat;
    case Shape::cylinder:
      return std::hypot(local.x(), local.y()) < 0.5 * s.x() - kFlat && local.z() > kFlat &&
             local.z() < s.z() - kFlat;
    case Shape::sphere:
      return (local - Vec3(0, 0, 0.5 * s.x())).norm() < 0.5 * s.x() - kFlat;
    case Shape::composite: return false;
  }
  return false;
}

/// 2D footprint of a base-touching part, world frame.
bool in_footprint(const ObjectSpec& o, const PrimitivePart& part, const Vec2& q) {
  const Vec3 local = invert(part_frame(o, part))(Vec3(q.x(), q.y(), o.position.z()));
  switch (part.shape) {
    case Shape::box:
      return std::abs(local.x()) <= 0.5 * part.size.x() && std::abs(local.y()) <= 0.5 * part.size.y();
    case Shape::cylinder:
    case Shape::sphere: return std::hypot(local.x(), local.y()) <= 0.5 * part.size.x();
    case Shape::composite: return false;
  }
  return false;
}

/// World-frame xy bounds of an object's parts.
Aabb object_footprint_box(const ObjectSpec& o) {
  std::vector<Vec3> corners;
  for (const auto& part : o.resolved_parts()) {
    const RigidTransform f = part_frame(o, part);
    const Vec3& s = part.size;
    const double hx = 0.5 * s.x();
    const double hy = part.shape == Shape::box ? 0.5 * s.y() : 0.5 * s.x();
    const double h = part.shape == Shape::sphere ? s.x() : s.z();
    for (double sx : {-hx, hx})
      for (double sy : {-hy, hy})
        for (double sz : {0.0, h}) corners.push_back(f(Vec3(sx, sy, sz)));
  }
  return Aabb::from_points(corners);
}

bool boxes_overlap_xy(const Aabb& a, const Aabb& b) {
  return a.min.x() < b.max.x() - kFlat && b.min.x() < a.max.x() - kFlat && a.min.y() < b.max.y() - kFlat &&
         b.min.y() < a.max.y() - kFlat;
}

Aabb furniture_box(const FurnitureSpec& f) {
  const Vec3 half(0.5 * f.size.x(), 0.5 * f.size.y(), 0.0);
  return {f.position - half, f.position + half + Vec3(0, 0, f.size.z())};
}

/// Index of the support an object stands on: -1 floor, otherwise furniture index.
int support_of(const SceneSpec& spec, const ObjectSpec& o) {
  if (std::abs(o.position.z() - spec.floor_height) < 1e-6) return -1;
  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    if (std::abs(o.position.z() - spec.furniture[i].top_height()) < 1e-6) return static_cast<int>(i);
  }
  return -2;
}

struct SceneGeometry {
  std::vector<Patch> patches;
  std::vector<int> object_support;
};

SceneGeometry build_geometry(const SceneSpec& spec) {
  SceneGeometry g;
  const double W = spec.room_extent.x(), D = spec.room_extent.y(), H = spec.room_extent.z();
  const double fz = spec.floor_height;
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();

  auto rect = [&](const Vec3& c, const Vec3& u, const Vec3& v, double a, double b, int support) {
    Patch p;
    p.frame = face_frame(c, u, v);
    p.a = a;
    p.b = b;
    p.support = support;
    g.patches.push_back(p);
  };
  rect({0.5 * W, 0.5 * D, fz}, X, Y, W, D, -2);
  if (H > 0.0) {
    rect({0.0, 0.5 * D, fz + 0.5 * H}, Y, Z, D, H, -1);
    rect({W, 0.5 * D, fz + 0.5 * H}, Z, Y, H, D, -1);
    rect({0.5 * W, 0.0, fz + 0.5 * H}, Z, X, H, W, -1);
    rect({0.5 * W, D, fz + 0.5 * H}, X, Z, W, H, -1);
  }

  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    const auto& f = spec.furniture[i];
    Patch proto;
    const auto first = g.patches.size();
    add_box(g.patches, RigidTransform::from_yaw(0.0, f.position), f.size, false, proto);
    g.patches[first].support = static_cast<int>(i);  // top face comes first
  }

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    g.object_support.push_back(support_of(spec, o));
    const auto parts = o.resolved_parts();
    for (std::size_t k = 0; k < parts.size(); ++k) {
      Patch proto;
      proto.label = static_cast<int>(i);
      proto.object = static_cast<int>(i);
      proto.part = static_cast<int>(k);
      const bool elevated = parts[k].offset.z() > kFlat;
      const RigidTransform f = part_frame(o, parts[k]);
      switch (parts[k].shape) {
        case Shape::box: add_box(g.patches, f, parts[k].size, elevated, proto); break;
        case Shape::cylinder: add_cylinder(g.patches, f, parts[k].size, elevated, proto); break;
        case Shape::sphere: add_sphere(g.patches, f, parts[k].size, proto); break;
        case Shape::composite: break;
      }
    }
  }
  return g;
}

/// Rejects samples hidden inside the union of an object's parts or under an object.
bool keep_sample(const SceneSpec& spec, const SceneGeometry& g, const Patch& patch, const Vec3& p) {
  if (patch.support != -1) {
    const int support_id = patch.support == -2 ? -1 : patch.support;
    const Vec2 q(p.x(), p.y());
    if (patch.support == -2) {
      for (const auto& f : spec.furniture) {
        const Aabb b = furniture_box(f);
        if (q.x() > b.min.x() && q.x() < b.max.x() && q.y() > b.min.y() && q.y() < b.max.y()) return false;
      }
    }
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      if (g.object_support[i] != support_id) continue;
      for (const auto& part : spec.objects[i].resolved_parts()) {
        if (part.offset.z() <= kFlat && in_footprint(spec.objects[i], part, q)) return false;
      }
    }
  }
  if (patch.object >= 0) {
    const auto& o = spec.objects[static_cast<std::size_t>(patch.object)];
    const auto parts = o.resolved_parts();
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (static_cast<int>(k) == patch.part) continue;
      if (inside_part(parts[k], invert(part_frame(o, parts[k]))(p))) return false;
    }
  }
  return true;
}

PointCloud sample_geometry(const SceneSpec& spec, const SceneGeometry& g, double density, std::mt19937_64& rng) {
  PointCloud cloud;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& patch : g.patches) {
    const auto n = static_cast<long>(std::lround(patch.area() * density));
    for (long k = 0; k < n; ++k) {
      const Vec3 p = patch.sample(rng);
      if (!keep_sample(spec, g, patch, p)) continue;
      Vec3 jitter = Vec3::Zero();
      if (spec.noise_sigma > 0.0) jitter = spec.noise_sigma * Vec3(noise(rng), noise(rng), noise(rng));
      cloud.push_back(p + jitter, patch.label);
    }
  }
  return cloud;
}

std::vector<Vec2> workspace_of(const SceneSpec& spec) {
  if (!spec.workspace_polygon.empty()) return spec.workspace_polygon;
  const double m = spec.workspace_margin;
  const double W = spec.room_extent.x(), D = spec.room_extent.y();
  return {{m, m}, {W - m, m}, {W - m, D - m}, {m, D - m}};
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::invalid_spec, what); }

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::box: return "box";
    case Shape::cylinder: return "cylinder";
    case Shape::sphere: return "sphere";
    case Shape::composite: return "composite";
  }
  return "box";
}

Shape shape_from_string(const std::string& name) {
  if (name == "box") return Shape::box;
  if (name == "cylinder") return Shape::cylinder;
  if (name == "sphere") return Shape::sphere;
  if (name == "composite") return Shape::composite;
  invalid("unknown shape '" + name + "'");
}

std::vector<PrimitivePart> ObjectSpec::resolved_parts() const {
  if (shape == Shape::composite) return parts;
  return {PrimitivePart{shape, Vec3::Zero(), size}};
}

void validate_spec(const SceneSpec& spec) {
  if (!(spec.density > 0.0)) invalid("density must be > 0");
  if (!(spec.noise_sigma >= 0.0)) invalid("noise_sigma must be >= 0");
  if (!(spec.room_extent.x() > 0.0 && spec.room_extent.y() > 0.0 && spec.room_extent.z() >= 0.0)) {
    invalid("room extent must be positive (wall height may be 0)");
  }
  if (!(spec.low_density_ratio > 0.0 && spec.low_density_ratio <= 0.25)) invalid("low_density_ratio must be in (0, 0.25]");
  if (!(spec.reach_z_min < spec.reach_z_max)) invalid("reach band is empty");
  for (const auto& d : spec.drawers) {
    if (!(d.max_extension > 0.0)) invalid("drawer max_extension must be > 0");
    if (d.slide_axis.norm() < 1e-9) invalid("drawer slide axis is zero");
  }
  const Aabb room{Vec3(0, 0, spec.floor_height), Vec3(spec.room_extent.x(), spec.room_extent.y(),
                                                       spec.floor_height + spec.room_extent.z())};
  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    const auto& f = spec.furniture[i];
    if (!(f.size.array() > 0.0).all()) invalid("furniture '" + f.name + "' has non-positive size");
    if (std::abs(f.position.z() - spec.floor_height) > 1e-6) invalid("furniture '" + f.name + "' is not on the floor");
    const Aabb b = furniture_box(f);
    if (!room.contains(b.min, 1e-9) || !room.contains(b.max, 1e-9)) invalid("furniture '" + f.name + "' leaves the room");
    for (std::size_t j = 0; j < i; ++j) {
      if (boxes_overlap_xy(b, furniture_box(spec.furniture[j]))) invalid("furniture '" + f.name + "' overlaps");
    }
  }
  std::vector<Aabb> footprints;
  std::vector<int> supports;
  for (const auto& o : spec.objects) {
    if (o.label.empty()) invalid("object without label");
    const auto parts = o.resolved_parts();
    if (parts.empty()) invalid("object '" + o.label + "' has no parts");
    for (const auto& p : parts) {
      if (p.shape == Shape::composite) invalid("nested composite in '" + o.label + "'");
      const bool ok = p.shape == Shape::sphere ? p.size.x() > 0.0 : (p.size.array() > 0.0).all();
      if (!ok) invalid("object '" + o.label + "' has non-positive size");
    }
    const int s = support_of(spec, o);
    if (s == -2) invalid("object '" + o.label + "' is floating unsupported");
    const Aabb fp = object_footprint_box(o);
    if (!room.contains(fp.min, 1e-9) || !room.contains(fp.max, 1e-9)) invalid("object '" + o.label + "' leaves the room");
    if (s >= 0) {
      const Aabb top = furniture_box(spec.furniture[static_cast<std::size_t>(s)]);
      const bool within = fp.min.x() >= top.min.x() && fp.max.x() <= top.max.x() && fp.min.y() >= top.min.y() &&
                          fp.max.y() <= top.max.y();
      if (!within) invalid("object '" + o.label + "' overhangs its support");
    } else {
      for (const auto& f : spec.furniture) {
        if (boxes_overlap_xy(fp, furniture_box(f))) invalid("object '" + o.label + "' overlaps furniture");
      }
    }
    for (std::size_t j = 0; j < footprints.size(); ++j) {
      if (supports[j] == s && boxes_overlap_xy(fp, footprints[j])) invalid("object '" + o.label + "' overlaps another object");
    }
    footprints.push_back(fp);
    supports.push_back(s);
  }
}

GeneratedScene generate_scene(const SceneSpec& spec) {
  validate_spec(spec);
  const SceneGeometry g = build_geometry(spec);

  GeneratedScene out;
  std::mt19937_64 high_rng(spec.seed);
  out.high_cloud = sample_geometry(spec, g, spec.density, high_rng);

  std::mt19937_64 low_rng(spec.seed ^ 0x5bd1e9955bd1e995ull);
  const PointCloud low_truth = sample_geometry(spec, g, spec.density * spec.low_density_ratio, low_rng);

  std::mt19937_64 offset_rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 axis(gauss(offset_rng), gauss(offset_rng), gauss(offset_rng));
  if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
  Vec3 dir(gauss(offset_rng), gauss(offset_rng), gauss(offset_rng));
  if (dir.norm() < 1e-12) dir = Vec3::UnitX();
  const double angle = (2.0 * unit(offset_rng) - 1.0) * spec.max_offset_rotation;
  const double shift = unit(offset_rng) * spec.max_offset_translation;
  out.scan_offset = RigidTransform::from_axis_angle(axis, angle, shift * dir.normalized());
  out.low_cloud = apply_transform(low_truth, out.scan_offset);

  SceneBundle& b = out.ground_truth;
  b.floor_height = spec.floor_height;
  b.workspace.polygon = workspace_of(spec);
  b.workspace.z_min = spec.reach_z_min;
  b.workspace.z_max = spec.reach_z_max;
  b.robot_start = spec.robot_start;
  std::vector<PointCloud> per_object(spec.objects.size());
  for (std::size_t i = 0; i < out.high_cloud.size(); ++i) {
    const int label = out.high_cloud.labels[i];
    if (label >= 0) {
      per_object[static_cast<std::size_t>(label)].push_back(out.high_cloud.points[i], label);
    } else {
      b.static_cloud.points.push_back(out.high_cloud.points[i]);
    }
  }
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    b.objects.push_back(make_instance(static_cast<int>(i), spec.objects[i].label, std::move(per_object[i])));
  }
  for (std::size_t i = 0; i < spec.drawers.size(); ++i) {
    const auto& d = spec.drawers[i];
    b.drawers.push_back(DrawerModel{static_cast<int>(i), d.anchor, d.slide_axis.normalized(), d.max_extension, 0.0});
  }
  for (const auto& f : spec.furniture) {
    const Aabb box = furniture_box(f);
    Aabb top{Vec3(box.min.x(), box.min.y(), box.max.z()), box.max};
    b.supports.push_back(SupportSurface{f.name, top});
  }
  return out;
}

double surface_distance(const SceneSpec& spec, const Vec3& p) {
  const SceneGeometry g = build_geometry(spec);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& patch : g.patches) best = std::min(best, patch.distance(p));
  return best;
}

SceneSpec default_scene_spec() {
  SceneSpec s;
  s.room_extent = {5.0, 4.0, 1.0};
  s.furniture = {
      {"shelf", {0.45, 3.6, 0.0}, {0.8, 0.5, 0.8}},
      {"cabinet", {4.3, 2.0, 0.0}, {0.6, 1.2, 0.45}},
  };
  auto cylinder = [](std::string label, Vec3 pos, double diameter, double height) {
    ObjectSpec o;
    o.label = std::move(label);
    o.shape = Shape::cylinder;
    o.position = pos;
    o.size = {diameter, diameter, height};
    return o;
  };
  s.objects.push_back(cylinder("white_can", {0.45, 3.6, 0.8}, 0.10, 0.16));
  s.objects.push_back(cylinder("green_can", {0.35, 0.35, 0.0}, 0.11, 0.22));

  ObjectSpec mug;
  mug.label = "green_mug";
  mug.shape = Shape::composite;
  mug.position = {2.5, 0.3, 0.0};
  mug.parts = {{Shape::cylinder, {0, 0, 0}, {0.09, 0.09, 0.10}},
               {Shape::box, {0.055, 0.0, 0.02}, {0.03, 0.015, 0.06}}};
  s.objects.push_back(mug);

  s.objects.push_back(cylinder("black_bottle", {4.3, 1.65, 0.45}, 0.07, 0.25));

  ObjectSpec blue;
  blue.label = "blue_plush";
  blue.shape = Shape::composite;
  blue.position = {4.3, 2.0, 0.45};
  blue.parts = {{Shape::sphere, {0, 0, 0}, {0.11, 0.11, 0.11}}, {Shape::sphere, {0, 0, 0.09}, {0.08, 0.08, 0.08}}};
  s.objects.push_back(blue);

  ObjectSpec cow;
  cow.label = "cow_plush";
  cow.shape = Shape::composite;
  cow.position = {4.3, 2.37, 0.45};
  cow.parts = {{Shape::box, {0, 0, 0}, {0.16, 0.09, 0.09}}, {Shape::sphere, {0.1, 0.0, 0.05}, {0.08, 0.08, 0.08}}};
  s.objects.push_back(cow);

  s.drawers = {DrawerSpec{{4.0, 2.0, 0.3}, {-1.0, 0.0, 0.0}, 0.35}};
  return s;
}

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 to_vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json part_json(const PrimitivePart& p) {
  return {{"shape", to_string(p.shape)}, {"offset", vec(p.offset)}, {"size", vec(p.size)}};
}

}  // namespace

void save_scene_spec(const SceneSpec& spec, const std::filesystem::path& path) {
  json j;
  j["room_extent"] = vec(spec.room_extent);
  j["floor_height"] = spec.floor_height;
  j["density"] = spec.density;
  j["noise_sigma"] = spec.noise_sigma;
  j["seed"] = spec.seed;
  j["low_density_ratio"] = spec.low_density_ratio;
  j["max_offset_translation"] = spec.max_offset_translation;
  j["max_offset_rotation_deg"] = spec.max_offset_rotation * 180.0 / kPi;
  j["workspace_margin"] = spec.workspace_margin;
  j["reach_band"] = {spec.reach_z_min, spec.reach_z_max};
  j["robot_start"] = {spec.robot_start.x, spec.robot_start.y, spec.robot_start.theta};
  j["workspace_polygon"] = json::array();
  for (const auto& p : spec.workspace_polygon) j["workspace_polygon"].push_back({p.x(), p.y()});
  j["furniture"] = json::array();
  for (const auto& f : spec.furniture) {
    j["furniture"].push_back({{"name", f.name}, {"position", vec(f.position)}, {"size", vec(f.size)}});
  }
  j["objects"] = json::array();
  for (const auto& o : spec.objects) {
    json oj{{"label", o.label}, {"shape", to_string(o.shape)}, {"position", vec(o.position)}, {"yaw", o.yaw}};
    if (o.shape == Shape::composite) {
      oj["parts"] = json::array();
      for (const auto& p : o.parts) oj["parts"].push_back(part_json(p));
    } else {
      oj["size"] = vec(o.size);
    }
    j["objects"].push_back(oj);
  }
  j["drawers"] = json::array();
  for (const auto& d : spec.drawers) {
    j["drawers"].push_back({{"anchor", vec(d.anchor)}, {"slide_axis", vec(d.slide_axis)}, {"max_extension", d.max_extension}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  SceneSpec s;
  try {
    const json j = json::parse(in);
    s.room_extent = to_vec3(j.at("room_extent"));
    s.floor_height = j.value("floor_height", 0.0);
    s.density = j.value("density", s.density);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
    s.low_density_ratio = j.value("low_density_ratio", s.low_density_ratio);
    s.max_offset_translation = j.value("max_offset_translation", s.max_offset_translation);
    if (j.contains("max_offset_rotation_deg")) s.max_offset_rotation = j["max_offset_rotation_deg"].get<double>() * kPi / 180.0;
    s.workspace_margin = j.value("workspace_margin", s.workspace_margin);
    if (j.contains("reach_band")) {
      s.reach_z_min = j["reach_band"].at(0).get<double>();
      s.reach_z_max = j["reach_band"].at(1).get<double>();
    }
    if (j.contains("robot_start")) {
      const auto& r = j["robot_start"];
      s.robot_start = {r.at(0).get<double>(), r.at(1).get<double>(), r.size() > 2 ? r.at(2).get<double>() : 0.0};
    }
    for (const auto& p : j.value("workspace_polygon", json::array())) {
      s.workspace_polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    for (const auto& f : j.value("furniture", json::array())) {
      s.furniture.push_back({f.at("name").get<std::string>(), to_vec3(f.at("position")), to_vec3(f.at("size"))});
    }
    for (const auto& oj : j.value("objects", json::array())) {
      ObjectSpec o;
      o.label = oj.at("label").get<std::string>();
      o.shape = shape_from_string(oj.at("shape").get<std::string>());
      o.position = to_vec3(oj.at("position"));
      o.yaw = oj.value("yaw", 0.0);
      if (o.shape == Shape::composite) {
        for (const auto& pj : oj.at("parts")) {
          o.parts.push_back({shape_from_string(pj.at("shape").get<std::string>()), to_vec3(pj.value("offset", json::array({0, 0, 0}))),
                             to_vec3(pj.at("size"))});
        }
      } else {
        o.size = to_vec3(oj.at("size"));
      }
      s.objects.push_back(o);
    }
    for (const auto& d : j.value("drawers", json::array())) {
      s.drawers.push_back({to_vec3(d.at("anchor")), to_vec3(d.at("slide_axis")), d.at("max_extension").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_spec, std::string("scene spec: ") + e.what());
  }
  return s;
}

}  // namespace dollhouse
