#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "dollhouse/error.hpp"
#include "dollhouse/registration/icp.hpp"
#include "dollhouse/scene/generator.hpp"
#include "dollhouse/scene/ply.hpp"
#include "dollhouse/segmentation/bundle_io.hpp"
#include "dollhouse/segmentation/segmentation.hpp"
#include "dollhouse/server/http.hpp"
#include "dollhouse/trials/trials.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dollhouse;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
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

// Scene-level declarations that segmentation does not detect.
json scan_manifest(const GeneratedScene& g) {
  const SceneBundle& b = g.ground_truth;
  json polygon = json::array();
  for (const auto& p : b.workspace.polygon) polygon.push_back({p.x(), p.y()});
  json drawers = json::array();
  for (const auto& d : b.drawers) {
    drawers.push_back({{"id", d.id}, {"anchor", vec_json(d.anchor)}, {"slide_axis", vec_json(d.slide_axis)},
                       {"max_extension", d.max_extension}});
  }
  return {{"scan_offset", transform_json(g.scan_offset)},
          {"workspace", {{"polygon", polygon}, {"z_min", b.workspace.z_min}, {"z_max", b.workspace.z_max}}},
          {"drawers", drawers},
          {"robot_start", {{"x", b.robot_start.x}, {"y", b.robot_start.y}, {"theta", b.robot_start.theta}}}};
}

void scene_generate(const std::string& spec_path, std::optional<std::uint64_t> seed, const fs::path& out) {
  SceneSpec spec = spec_path.empty() ? default_scene_spec() : load_scene_spec(spec_path);
  if (seed) spec.seed = *seed;
  const GeneratedScene g = generate_scene(spec);
  fs::create_directories(out);
  save_scene_spec(spec, out / "spec.json");
  save_ply(g.high_cloud, out / "high.ply");
  save_ply(g.low_cloud, out / "low.ply");
  write_text_file(out / "scan.json", scan_manifest(g).dump(2) + "\n");
  save_bundle(g.ground_truth, out / "ground_truth");
  std::cout << "high " << g.high_cloud.size() << " points, low " << g.low_cloud.size() << " points, "
            << g.ground_truth.objects.size() << " objects -> " << out.string() << "\n";
}

void scene_build(const fs::path& scan, const fs::path& out, bool register_low) {
  const PointCloud high = load_ply(scan / "high.ply");
  const json manifest = read_json_file(scan / "scan.json");
  Workspace ws;
  for (const auto& p : manifest.at("workspace").at("polygon")) ws.polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  ws.z_min = manifest.at("workspace").at("z_min").get<double>();
  ws.z_max = manifest.at("workspace").at("z_max").get<double>();
  std::vector<DrawerModel> drawers;
  for (const auto& d : manifest.at("drawers")) {
    drawers.push_back({d.at("id").get<int>(), vec_from(d.at("anchor")), vec_from(d.at("slide_axis")),
                       d.at("max_extension").get<double>(), 0.0});
  }

  Segmentation seg = segment_scene(high, default_label_config(), drawers, ws);
  const auto& r = manifest.at("robot_start");
  seg.bundle.robot_start = {r.at("x").get<double>(), r.at("y").get<double>(), r.at("theta").get<double>()};
  save_bundle(seg.bundle, out);
  std::cout << seg.bundle.objects.size() << " objects, " << seg.bundle.static_cloud.size() << " static points, "
            << seg.bundle.supports.size() << " supports -> " << out.string() << "\n";
  for (const auto& o : seg.bundle.objects) std::cout << "  " << o.id << " " << o.label << " " << o.cloud.size() << "\n";

  if (register_low) {
    const PointCloud low = load_ply(scan / "low.ply");
    const IcpResult icp = icp_align(low, high, RigidTransform::identity());
    json reg{{"transform", transform_json(icp.transform)},
             {"rmse", icp.rmse},
             {"iterations", icp.iterations},
             {"converged", icp.converged}};
    // The generator records the true offset; report how far the estimate is from it.
    const RigidTransform truth = invert(transform_from(manifest.at("scan_offset")));
    const RigidTransform err = compose(invert(truth), icp.transform);
    reg["translation_error"] = err.translation.norm();
    reg["rotation_error"] = rotation_angle(err.rotation);
    write_text_file(out / "registration.json", reg.dump(2) + "\n");
    std::cout << "registration: rmse " << icp.rmse << ", error " << err.translation.norm() << " m / "
              << rotation_angle(err.rotation) << " rad\n";
  }
}

int serve(const fs::path& bundle_dir, const std::string& config_path, std::optional<std::uint64_t> seed,
          std::optional<int> port, const std::string& static_dir) {
  ServerConfig cfg = config_path.empty() ? ServerConfig{} : load_server_config(config_path);
  if (!bundle_dir.empty()) cfg.bundle = bundle_dir;
  if (seed) cfg.seed = *seed;
  if (port) cfg.port = *port;
  std::string reason;
  auto bundle = cfg.bundle.empty() ? nullptr : try_load_bundle(cfg.bundle, &reason);
  if (!bundle) std::cerr << "warning: no scene bundle loaded" << (reason.empty() ? "" : ": " + reason) << "\n";
  MissionService service(cfg, bundle);
  HttpServer http(service, static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));
  g_server = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving on http://" << cfg.host << ":" << cfg.port << " (time scale " << cfg.time_scale << "x)"
            << std::endl;
  http.run(cfg.host, cfg.port);
  g_server = nullptr;
  return 0;
}

void trials_run(const fs::path& bundle_dir, const std::string& config_path, std::optional<std::uint64_t> seed,
                const fs::path& out, std::optional<int> workers) {
  TrialsConfig cfg = config_path.empty() ? TrialsConfig{} : trials_config_from_json(read_json_file(config_path));
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  const auto bundle = std::make_shared<const SceneBundle>(load_bundle(bundle_dir));
  const BatchResult result = run_batch(bundle, cfg);
  write_batch_outputs(result, out);
  std::cout << render_report(result.report, ReportFormat::table) << "\n"
            << render_report(result.report, ReportFormat::summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dollhouse teleoperation stack: scene pipeline, mission server and trial harness"};
  app.require_subcommand(1);

  auto* scene = app.add_subcommand("scene", "Offline scene pipeline");
  scene->require_subcommand(1);
  std::string spec_path;
  std::optional<std::uint64_t> scene_seed;
  std::string scene_out;
  auto* gen = scene->add_subcommand("generate", "Generate a synthetic scan pair and its ground truth");
  gen->add_option("--spec", spec_path, "Scene spec JSON (default: built-in scene)")->check(CLI::ExistingFile);
  gen->add_option("--seed", scene_seed, "Override the spec seed");
  gen->add_option("--out", scene_out, "Output directory")->required();

  std::string scan_dir, bundle_out;
  bool register_low = false;
  auto* build = scene->add_subcommand("build", "Segment a generated scan into a scene bundle");
  build->add_option("--scan", scan_dir, "Directory written by 'scene generate'")->required()->check(CLI::ExistingDirectory);
  build->add_option("--out", bundle_out, "Bundle directory")->required();
  build->add_flag("--register", register_low, "Also register the low-detail scan onto the high-detail one");

  std::string bundle_dir, config_path, static_dir, trials_out;
  std::optional<std::uint64_t> seed;
  std::optional<int> port, workers;
  auto* srv = app.add_subcommand("serve", "Run the mission server");
  srv->add_option("--bundle", bundle_dir, "Scene bundle directory");
  srv->add_option("--config", config_path, "Server config JSON")->check(CLI::ExistingFile);
  srv->add_option("--seed", seed, "Override the config seed");
  srv->add_option("--port", port, "Override the config port");
  srv->add_option("--static", static_dir, "Directory served at / (console build)")->check(CLI::ExistingDirectory);

  auto* trials = app.add_subcommand("trials", "Batch experiments");
  trials->require_subcommand(1);
  auto* run = trials->add_subcommand("run", "Run a trial batch and write records and reports");
  run->add_option("--bundle", bundle_dir, "Scene bundle directory")->required()->check(CLI::ExistingDirectory);
  run->add_option("--config", config_path, "Trials config JSON")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", trials_out, "Output directory")->required();
  run->add_option("--workers", workers, "Parallel simulator instances")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) scene_generate(spec_path, scene_seed, scene_out);
    if (build->parsed()) scene_build(scan_dir, bundle_out, register_low);
    if (srv->parsed()) return serve(bundle_dir, config_path, seed, port, static_dir);
    if (run->parsed()) trials_run(bundle_dir, config_path, seed, trials_out, workers);
  } catch (const Error& e) {
    std::cerr << "error [" << to_tag(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
