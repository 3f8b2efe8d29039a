#include "dollhouse/trials/trials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

using nlohmann::json;

// Stages of one placement, in execution order.
const std::vector<std::pair<std::string, std::optional<MissionPhase>>> kStages{
    {"ui", std::nullopt},
    {"planning", MissionPhase::planning},
    {"navigating_to_object", MissionPhase::navigating_to_object},
    {"grasping", MissionPhase::grasping},
    {"navigating_to_destination", MissionPhase::navigating_to_destination},
    {"placing", MissionPhase::placing},
};

Vec3 vec_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw Error(ErrorKind::invalid_spec, what + " must be [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

/// Mean and sample standard deviation, summed in sorted order so the result
/// does not depend on input order.
std::pair<double, double> mean_std(std::vector<double> v) {
  if (v.empty()) return {0.0, 0.0};
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mean) * (x - mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double x : sq) ss += x;
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::string line;
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (i > 0) line += "  ";
      line += rows[k][i] + std::string(width[i] - rows[k][i].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i > 0 ? 2 : 0);
      out << std::string(total, '-') << "\n";
    }
  }
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

TrialsConfig trials_config_from_json(const json& j) {
  TrialsConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorKind::invalid_spec, "trials config must be an object");
  try {
    c.trials_per_object = j.value("trials_per_object", c.trials_per_object);
    if (j.contains("objects")) c.objects = j.at("objects").get<std::vector<int>>();
    if (j.contains("drop_point")) c.drop_point = vec_from(j.at("drop_point"), "drop_point");
    if (j.contains("drop_points")) {
      for (const auto& [label, p] : j.at("drop_points").items()) c.drop_points[label] = vec_from(p, "drop_points." + label);
    }
    if (j.contains("locations")) c.locations = j.at("locations").get<std::map<std::string, std::string>>();
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_spec, std::string("trials config: ") + e.what());
  }
  if (j.contains("mission")) c.mission = mission_config_from_json(j.at("mission"));
  if (c.trials_per_object < 0) throw Error(ErrorKind::invalid_spec, "trials_per_object must be >= 0");
  if (c.workers < 1) throw Error(ErrorKind::invalid_spec, "workers must be >= 1");
  return c;
}

std::string ObjectStats::main_issue() const {
  std::string best = "none";
  int count = 0;
  for (const auto& [tag, n] : failures) {
    if (n > count) {
      best = tag;
      count = n;
    }
  }
  return best;
}

TrialReport summarize(const std::vector<MissionRecord>& records, const SceneBundle& bundle,
                      const std::map<std::string, std::string>& locations) {
  TrialReport r;
  std::map<int, ObjectStats> per_object;
  std::vector<std::vector<double>> stage_values(kStages.size());
  std::vector<double> totals;
  for (const auto& rec : records) {
    if (rec.object_id < 0 || rec.object_id >= static_cast<int>(bundle.objects.size())) {
      throw Error(ErrorKind::bundle_mismatch, "record for unknown object " + std::to_string(rec.object_id));
    }
    ObjectStats& s = per_object[rec.object_id];
    ++s.attempts;
    ++r.attempts;
    if (rec.outcome == Outcome::success) {
      ++s.successes;
      ++r.successes;
      for (std::size_t i = 0; i < kStages.size(); ++i) {
        stage_values[i].push_back(kStages[i].second ? rec.duration(*kStages[i].second) : rec.ui_latency);
      }
      totals.push_back(rec.total_duration());
    } else {
      const std::string tag = rec.failure_tag.value_or("unknown");
      ++s.failures[tag];
      ++r.failure_histogram[tag];
    }
  }
  for (auto& [id, s] : per_object) {
    const ObjectInstance& o = bundle.objects[id];
    s.object_id = id;
    s.label = o.label;
    const auto loc = locations.find(o.label);
    s.location = loc != locations.end() ? loc->second : support_name_at(bundle, o.origin_pose);
    r.objects.push_back(s);
  }
  for (std::size_t i = 0; i < kStages.size(); ++i) {
    const auto [mean, sd] = mean_std(stage_values[i]);
    r.stages.push_back({kStages[i].first, static_cast<int>(stage_values[i].size()), mean, sd});
  }
  std::tie(r.total_mean, r.total_stddev) = mean_std(totals);
  return r;
}

struct TrialRunner::Worker {
  Worker(const std::shared_ptr<const SceneBundle>& bundle, const MissionConfig& mission)
      : model(bundle, mission.planner), exec(model, mission), sim(bundle, mission.drift, mission.sim, model.static_tree()) {}

  MissionRecord run(const PickPlaceCommand& cmd, std::uint64_t seed) {
    for (int id = 0; id < static_cast<int>(model.bundle().objects.size()); ++id) {
      if (model.displaced(id, 0.0)) model.restore_object(id);
    }
    sim.reset(seed);
    std::mt19937_64 rng(seed);
    return exec.execute(cmd, sim, rng);
  }

  SceneModel model;
  MissionExecutor exec;
  RobotSim sim;
};

TrialRunner::TrialRunner(std::shared_ptr<const SceneBundle> bundle, TrialsConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config)) {
  if (!bundle_) throw Error(ErrorKind::invalid_argument, "TrialRunner needs a bundle");
  std::vector<int> objects = config_.objects;
  if (objects.empty()) {
    for (const auto& o : bundle_->objects) {
      if (o.movable) objects.push_back(o.id);
    }
  }
  for (int id : objects) {
    if (id < 0 || id >= static_cast<int>(bundle_->objects.size())) {
      throw Error(ErrorKind::bundle_mismatch, "trials reference unknown object " + std::to_string(id));
    }
    if (!bundle_->objects[id].movable) {
      throw Error(ErrorKind::bundle_mismatch, "trials reference static object " + std::to_string(id));
    }
  }
  std::set<std::string> labels;
  for (const auto& o : bundle_->objects) labels.insert(o.label);
  auto check_labels = [&](const auto& map, const char* what) {
    for (const auto& [label, _] : map) {
      if (!labels.count(label)) throw Error(ErrorKind::bundle_mismatch, std::string(what) + " names unknown label " + label);
    }
  };
  check_labels(config_.drop_points, "drop_points");
  check_labels(config_.locations, "locations");
  check_labels(config_.mission.failures.per_label, "failures.per_label");

  for (int id : objects) {
    const auto it = config_.drop_points.find(bundle_->objects[id].label);
    const Vec3 drop = it != config_.drop_points.end() ? it->second : config_.drop_point;
    for (int k = 0; k < config_.trials_per_object; ++k) trials_.push_back({id, drop});
  }
}

TrialRunner::~TrialRunner() = default;

BatchResult TrialRunner::run(std::uint64_t seed) {
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config_.workers), std::max<std::size_t>(trials_.size(), 1));
  while (workers_.size() < n_workers) workers_.push_back(std::make_unique<Worker>(bundle_, config_.mission));

  std::vector<MissionRecord> records(trials_.size());
  auto work = [&](std::size_t w) {
    for (std::size_t t = w; t < trials_.size(); t += n_workers) {
      records[t] = workers_[w]->run({trials_[t].object_id, trials_[t].drop, "trial-" + std::to_string(t)},
                                    trial_seed(seed, t));
    }
  };
  if (n_workers <= 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(n_workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BatchResult out;
  out.report = summarize(records, *bundle_, config_.locations);
  out.records = std::move(records);
  return out;
}

BatchResult run_batch(std::shared_ptr<const SceneBundle> bundle, const TrialsConfig& config) {
  return TrialRunner(std::move(bundle), config).run(config.seed);
}

std::string render_report(const TrialReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::summary: {
      std::vector<std::vector<std::string>> rows{{"Object", "Pick-up location", "Success rate", "Main issue"}};
      for (const auto& o : r.objects) {
        rows.push_back({o.label, o.location, fixed(o.rate(), 2), o.main_issue()});
      }
      return table(rows);
    }
    case ReportFormat::csv: {
      std::ostringstream out;
      out << "object,metric,value\n";
      auto row = [&](const std::string& object, const std::string& metric, double v) {
        out << csv_field(object) << "," << csv_field(metric) << "," << num(v) << "\n";
      };
      for (const auto& o : r.objects) {
        row(o.label, "attempts", o.attempts);
        row(o.label, "successes", o.successes);
        row(o.label, "success_rate", o.rate());
        for (const auto& [tag, n] : o.failures) row(o.label, "failures:" + tag, n);
      }
      row("all", "attempts", r.attempts);
      row("all", "successes", r.successes);
      row("all", "success_rate", r.overall_rate());
      for (const auto& [tag, n] : r.failure_histogram) row("all", "failures:" + tag, n);
      for (const auto& s : r.stages) {
        row("all", "stage_mean:" + s.stage, s.mean);
        row("all", "stage_std:" + s.stage, s.stddev);
      }
      row("all", "total_mean", r.total_mean);
      row("all", "total_std", r.total_stddev);
      return out.str();
    }
    case ReportFormat::table: {
      std::vector<std::vector<std::string>> rows{{"id", "object", "location", "attempts", "successes", "rate"}};
      for (const auto& o : r.objects) {
        rows.push_back({std::to_string(o.object_id), o.label, o.location, std::to_string(o.attempts),
                        std::to_string(o.successes), fixed(o.rate(), 3)});
      }
      rows.push_back({"", "all", "", std::to_string(r.attempts), std::to_string(r.successes), fixed(r.overall_rate(), 3)});
      std::string out = table(rows) + "\n";
      std::vector<std::vector<std::string>> fails{{"failure", "count"}};
      for (const auto& [tag, n] : r.failure_histogram) fails.push_back({tag, std::to_string(n)});
      out += table(fails) + "\n";
      std::vector<std::vector<std::string>> stages{{"stage", "n", "mean s", "std s"}};
      for (const auto& s : r.stages) stages.push_back({s.stage, std::to_string(s.count), fixed(s.mean, 2), fixed(s.stddev, 2)});
      stages.push_back({"total", std::to_string(r.successes), fixed(r.total_mean, 2), fixed(r.total_stddev, 2)});
      return out + table(stages);
    }
  }
  return {};
}

json report_to_json(const TrialReport& r) {
  json objects = json::array();
  for (const auto& o : r.objects) {
    objects.push_back({{"object_id", o.object_id},
                       {"label", o.label},
                       {"location", o.location},
                       {"attempts", o.attempts},
                       {"successes", o.successes},
                       {"success_rate", o.rate()},
                       {"failures", o.failures},
                       {"main_issue", o.main_issue()}});
  }
  json stages = json::array();
  for (const auto& s : r.stages) stages.push_back({{"stage", s.stage}, {"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}});
  return {{"attempts", r.attempts},
          {"successes", r.successes},
          {"success_rate", r.overall_rate()},
          {"failure_histogram", r.failure_histogram},
          {"objects", objects},
          {"stages", stages},
          {"total_mean", r.total_mean},
          {"total_stddev", r.total_stddev}};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::io_failure, "write failed for " + path.string());
}

std::string records_to_jsonl(const std::vector<MissionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<MissionRecord> records_from_jsonl(const std::string& text) {
  std::vector<MissionRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::malformed_file, std::string("bad record line: ") + e.what());
    }
  }
  return out;
}

void write_batch_outputs(const BatchResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_failure, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "records.jsonl", records_to_jsonl(result.records));
  write_text_file(dir / "report.json", report_to_json(result.report).dump(2) + "\n");
  write_text_file(dir / "report.csv", render_report(result.report, ReportFormat::csv));
  write_text_file(dir / "report.txt", render_report(result.report, ReportFormat::table));
  write_text_file(dir / "summary.txt", render_report(result.report, ReportFormat::summary));
}

}  // namespace dollhouse
