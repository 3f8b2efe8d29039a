#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <fstream>
#include <sstream>

#include "dollhouse/error.hpp"
#include "dollhouse/trials/trials.hpp"
#include "support/default_scene.hpp"

namespace dollhouse {
namespace {

using testing::default_bundle;

TrialsConfig quiet(int per_object) {
  TrialsConfig c;
  c.trials_per_object = per_object;
  c.mission.drift = DriftModel{0.0, 0.0, 0};
  c.mission.planner.capture_noise = 0.0;
  return c;
}

TEST(TrialsTest, NoFailuresNoNoiseSucceedsEverywhere) {
  const BatchResult r = run_batch(default_bundle(), quiet(3));
  EXPECT_EQ(r.report.attempts, 18);
  EXPECT_EQ(r.report.successes, 18);
  EXPECT_DOUBLE_EQ(r.report.overall_rate(), 1.0);
  EXPECT_TRUE(r.report.failure_histogram.empty());
  ASSERT_EQ(r.report.objects.size(), 6u);
  for (const auto& o : r.report.objects) EXPECT_EQ(o.main_issue(), "none");
  for (const auto& rec : r.records) {
    ASSERT_TRUE(rec.final_position);
    EXPECT_LT((*rec.final_position - Vec3(2.0, 1.2, 0.0)).norm(), 0.05);
  }
}

TEST(TrialsTest, ConstantLatenciesGiveExactStageMeans) {
  TrialsConfig c = quiet(2);
  c.mission.timing = TimingConfig{{1.0, 0.0}, {17.0, 0.0}, {20.0, 0.0}, {12.0, 0.0}, {10.0, 0.0}};
  const TrialReport r = run_batch(default_bundle(), c).report;
  ASSERT_EQ(r.stages.size(), 6u);
  EXPECT_EQ(r.stages[0].stage, "ui");
  EXPECT_DOUBLE_EQ(r.stages[0].mean, 10.0);
  EXPECT_DOUBLE_EQ(r.stages[1].mean, 17.0);
  EXPECT_DOUBLE_EQ(r.stages[1].stddev, 0.0);
  EXPECT_NEAR(r.stages[3].mean, 20.0, 1e-9);  // grasping: the arm motion takes no simulated time
  EXPECT_NEAR(r.stages[5].mean, 12.0, 1e-9);
  double sum = 0.0;
  for (const auto& s : r.stages) sum += s.mean;
  EXPECT_NEAR(r.total_mean, sum, 1e-9);
}

TEST(TrialsTest, DeterministicAcrossRunsAndWorkerCounts) {
  TrialsConfig c;
  c.trials_per_object = 4;
  c.mission.failures.defaults = calibrate_rates(0.7, {0.2, 0.2, 0.2, 0.2, 0.2});
  c.seed = 9;
  TrialRunner one(default_bundle(), c);
  const std::string a = records_to_jsonl(one.run(9).records);
  one.run(10);
  EXPECT_EQ(records_to_jsonl(one.run(9).records), a);  // warm caches change nothing
  c.workers = 3;
  EXPECT_EQ(records_to_jsonl(run_batch(default_bundle(), c).records), a);
  EXPECT_NE(records_to_jsonl(one.run(11).records), a);
}

TEST(TrialsTest, CountsAreConsistentAndReportIsPermutationInvariant) {
  TrialsConfig c;
  c.trials_per_object = 10;
  c.mission.failures.defaults = calibrate_rates(0.6, {0.3, 0.1, 0.3, 0.2, 0.1});
  const BatchResult r = run_batch(default_bundle(), c);
  int failures = 0;
  for (const auto& [tag, n] : r.report.failure_histogram) failures += n;
  EXPECT_EQ(r.report.successes + failures, 60);
  int attempts = 0;
  for (const auto& o : r.report.objects) {
    int f = 0;
    for (const auto& [tag, n] : o.failures) f += n;
    EXPECT_EQ(o.successes + f, o.attempts) << o.label;
    attempts += o.attempts;
  }
  EXPECT_EQ(attempts, 60);

  const std::string expected = report_to_json(r.report).dump();
  std::mt19937_64 rng(4);
  auto shuffled = r.records;
  for (int k = 0; k < 5; ++k) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(report_to_json(summarize(shuffled, *default_bundle())).dump(), expected);
  }
}

TEST(TrialsTest, InjectedModeRatesConvergeToConfiguredProbabilities) {
  // Conditional per-mode probabilities, checked against the trials that reach each mode.
  TrialsConfig c;
  c.trials_per_object = 10000 / 6 + 1;
  c.objects = {0, 1, 2, 3, 4, 5};
  c.mission.failures.defaults[FailureMode::collision_on_navigation] = 0.15;
  c.mission.failures.defaults[FailureMode::object_not_found] = 0.1;
  c.mission.failures.defaults[FailureMode::empty_grasp] = 0.2;
  c.mission.failures.defaults[FailureMode::collision_during_grasp] = 0.05;
  c.mission.failures.defaults[FailureMode::collision_on_destination] = 0.1;
  const BatchResult r = run_batch(default_bundle(), c);
  const int n = r.report.attempts;
  ASSERT_GE(n, 10000);
  int reaching = n;
  for (FailureMode mode : kFailureModes) {
    const int hits = r.report.failure_histogram.count(std::string(to_tag(mode)))
                         ? r.report.failure_histogram.at(std::string(to_tag(mode)))
                         : 0;
    const double p = c.mission.failures.defaults[mode];
    const double se = std::sqrt(p * (1.0 - p) / reaching);
    EXPECT_NEAR(static_cast<double>(hits) / reaching, p, 3.0 * se) << to_tag(mode);
    reaching -= hits;
  }
  EXPECT_EQ(reaching, r.report.successes);
}

TEST(TrialsTest, UnknownObjectsAndLabelsAreBundleMismatches) {
  TrialsConfig c = quiet(1);
  c.objects = {7};
  try {
    run_batch(default_bundle(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::bundle_mismatch);
  }
  c.objects = {};
  c.drop_points["unicorn"] = Vec3(1, 1, 0);
  EXPECT_THROW(TrialRunner(default_bundle(), c), Error);
}

TEST(TrialsTest, ConfigFromJson) {
  const auto c = trials_config_from_json(nlohmann::json::parse(R"({
    "trials_per_object": 5, "seed": 3, "drop_point": [1, 2, 0],
    "drop_points": {"green_mug": [2, 2, 0]}, "locations": {"green_mug": "Floor"},
    "mission": {"timing": {"ui": {"mean": 10, "cv": 0.1}}}})"));
  EXPECT_EQ(c.trials_per_object, 5);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.drop_point, Vec3(1, 2, 0));
  EXPECT_EQ(c.drop_points.at("green_mug"), Vec3(2, 2, 0));
  EXPECT_EQ(c.locations.at("green_mug"), "Floor");
  EXPECT_DOUBLE_EQ(c.mission.timing.ui.cv, 0.1);
  EXPECT_THROW(trials_config_from_json(nlohmann::json::parse(R"({"drop_point": [1, 2]})")), Error);
  EXPECT_THROW(trials_config_from_json(nlohmann::json::parse(R"({"workers": 0})")), Error);
}

MissionRecord failed(int id, const std::string& tag) {
  MissionRecord r;
  r.object_id = id;
  r.label = default_bundle()->objects[id].label;
  r.failure_tag = tag;
  return r;
}

TEST(TrialsExportTest, SummaryNamesTheModalFailure) {
  std::vector<MissionRecord> records;
  for (int id = 0; id < 6; ++id) {
    for (int k = 0; k < 3; ++k) records.push_back(failed(id, "empty_grasp"));
    records.push_back(failed(id, "collision_on_navigation"));
    MissionRecord ok;
    ok.object_id = id;
    ok.outcome = Outcome::success;
    records.push_back(ok);
  }
  records.push_back(failed(5, "object_not_found"));
  for (int k = 0; k < 3; ++k) records.push_back(failed(5, "collision_during_grasp"));
  const TrialReport r = summarize(records, *default_bundle(), {{"white_can", "Shelf"}});
  const std::string summary = render_report(r, ReportFormat::summary);
  std::istringstream in(summary);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u + 6u);
  EXPECT_NE(lines[0].find("Main issue"), std::string::npos);
  EXPECT_NE(lines[2].find("Shelf"), std::string::npos);
  EXPECT_NE(lines[2].find("empty_grasp"), std::string::npos);
  // Object 5 ties at three: the lexicographically smallest tag wins.
  EXPECT_NE(lines[7].find("collision_during_grasp"), std::string::npos);
  EXPECT_EQ(r.objects[0].location, "Shelf");
  EXPECT_EQ(r.objects[1].location, support_name_at(*default_bundle(), default_bundle()->objects[1].origin_pose));
}

TEST(TrialsExportTest, CsvRoundTripsTheReport) {
  TrialsConfig c;
  c.trials_per_object = 5;
  c.mission.failures.defaults = calibrate_rates(0.7, {0.2, 0.2, 0.2, 0.2, 0.2});
  const TrialReport r = run_batch(default_bundle(), c).report;
  std::istringstream in(render_report(r, ReportFormat::csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "object,metric,value");
  std::map<std::pair<std::string, std::string>, double> rows;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    rows[{line.substr(0, a), line.substr(a + 1, b - a - 1)}] = std::stod(line.substr(b + 1));
  }
  for (const auto& o : r.objects) {
    EXPECT_EQ(rows.at({o.label, "attempts"}), o.attempts);
    EXPECT_EQ(rows.at({o.label, "successes"}), o.successes);
    EXPECT_DOUBLE_EQ(rows.at({o.label, "success_rate"}), o.rate());
    for (const auto& [tag, n] : o.failures) EXPECT_EQ(rows.at({o.label, "failures:" + tag}), n);
  }
  EXPECT_DOUBLE_EQ(rows.at({"all", "success_rate"}), r.overall_rate());
  EXPECT_DOUBLE_EQ(rows.at({"all", "total_mean"}), r.total_mean);
  for (const auto& s : r.stages) EXPECT_DOUBLE_EQ(rows.at({"all", "stage_mean:" + s.stage}), s.mean);
}

TEST(TrialsExportTest, OutputsAndRecordLogRoundTrip) {
  const BatchResult r = run_batch(default_bundle(), quiet(1));
  const auto dir = std::filesystem::temp_directory_path() / "dollhouse_trials_out";
  std::filesystem::remove_all(dir);
  write_batch_outputs(r, dir);
  for (const char* f : {"records.jsonl", "report.json", "report.csv", "report.txt", "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream in(dir / "records.jsonl");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto back = records_from_jsonl(ss.str());
  EXPECT_EQ(records_to_jsonl(back), records_to_jsonl(r.records));
  const std::string table = render_report(r.report, ReportFormat::table);
  for (const auto& o : default_bundle()->objects) EXPECT_NE(table.find(o.label), std::string::npos);
  EXPECT_THROW(write_text_file("/nonexistent-dir/x/y.txt", "z"), Error);
}

}  // namespace
}  // namespace dollhouse
