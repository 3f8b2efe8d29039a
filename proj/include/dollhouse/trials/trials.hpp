#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dollhouse/server/mission.hpp"

namespace dollhouse {

struct TrialsConfig {
  int trials_per_object = 40;
  std::vector<int> objects;  // empty: every movable object, ascending
  Vec3 drop_point{2.0, 1.2, 0.0};
  std::map<std::string, Vec3> drop_points;        // per label, overrides drop_point
  std::map<std::string, std::string> locations;  // per label pick-up location name for the summary
  std::uint64_t seed = 1;
  int workers = 1;
  MissionConfig mission;
};

/// Every field optional. Throws invalid_spec.
TrialsConfig trials_config_from_json(const nlohmann::json& j);

struct ObjectStats {
  int object_id = -1;
  std::string label;
  std::string location;
  int attempts = 0;
  int successes = 0;
  std::map<std::string, int> failures;

  double rate() const { return attempts > 0 ? static_cast<double>(successes) / attempts : 0.0; }
  /// Most frequent failure tag, ties to the lexicographically smallest; "none" without failures.
  std::string main_issue() const;
};

struct PhaseStats {
  std::string stage;  // a MissionPhase name or "ui"
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 below two samples
};

/// Aggregate of a batch. Timing statistics cover successful missions only,
/// the ones that executed every stage.
struct TrialReport {
  std::vector<ObjectStats> objects;  // ascending object id
  int attempts = 0;
  int successes = 0;
  std::map<std::string, int> failure_histogram;
  std::vector<PhaseStats> stages;  // ui, planning, navigation, grasping, navigation, placing
  double total_mean = 0.0;
  double total_stddev = 0.0;

  double overall_rate() const { return attempts > 0 ? static_cast<double>(successes) / attempts : 0.0; }
};

/// Order-independent reduction: any permutation of `records` gives an identical report.
TrialReport summarize(const std::vector<MissionRecord>& records, const SceneBundle& bundle,
                      const std::map<std::string, std::string>& locations = {});

struct BatchResult {
  std::vector<MissionRecord> records;  // trial order: object by object
  TrialReport report;
};

/// Runs trials_per_object missions per object from its scanned pose to its
/// drop place. Each trial resets the simulator and the object and draws its
/// randomness from a seed derived from (seed, trial index), so records depend
/// only on (bundle, config, seed), not on the worker count or on earlier runs.
/// Workers and their plan caches persist across run() calls.
class TrialRunner {
 public:
  /// Throws bundle_mismatch for unknown or static objects and for unknown
  /// labels in the per-label maps.
  TrialRunner(std::shared_ptr<const SceneBundle> bundle, TrialsConfig config);
  ~TrialRunner();

  const TrialsConfig& config() const { return config_; }
  BatchResult run(std::uint64_t seed);

 private:
  struct Worker;
  struct Trial {
    int object_id;
    Vec3 drop;
  };

  std::shared_ptr<const SceneBundle> bundle_;
  TrialsConfig config_;
  std::vector<Trial> trials_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

/// TrialRunner(bundle, config).run(config.seed).
BatchResult run_batch(std::shared_ptr<const SceneBundle> bundle, const TrialsConfig& config);

enum class ReportFormat {
  table,    // aligned text: per-object rates, failure histogram, stage timing
  csv,      // object,metric,value rows
  summary,  // object, pick-up location, success rate, main issue
};

std::string render_report(const TrialReport& report, ReportFormat format);
nlohmann::json report_to_json(const TrialReport& report);

/// Writes `content` to `path`. Throws io_failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// One JSON record per line.
std::string records_to_jsonl(const std::vector<MissionRecord>& records);
std::vector<MissionRecord> records_from_jsonl(const std::string& text);

/// records.jsonl, report.json, report.csv, report.txt and summary.txt under `dir`.
void write_batch_outputs(const BatchResult& result, const std::filesystem::path& dir);

}  // namespace dollhouse
