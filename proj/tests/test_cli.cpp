#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pseudobench/cli.hpp"
#include "pseudobench/container.hpp"

using namespace pseudobench;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pseudobench_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  out << j.dump(2);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json small_synth_config(std::int64_t seed = 5) {
  return ordered_json{{"dataset_id", "tiny"}, {"n_subjects", 1},      {"n_sessions", 1},
                      {"n_channels", 4},      {"n_trials_per_class", 6},
                      {"classes", {"left", "right"}},                 {"sample_rate_hz", 100.0},
                      {"trial_seconds", 3.0}, {"gap_seconds", 2.0},   {"separability", 5.0},
                      {"seed", seed}};
}

}  // namespace

TEST_CASE("synth writes a dataset and is seed-reproducible") {
  const fs::path dir = fresh_dir("synth");
  write_json(dir / "spec.json", small_synth_config());

  CHECK(run_cli({"synth", "--config", (dir / "spec.json").string(), "--out",
                 (dir / "a").string()}) == 0);
  CHECK(fs::exists(dir / "a/tiny/index.json"));
  CHECK(fs::exists(dir / "a/tiny/S01_sess01.json"));
  CHECK(fs::exists(dir / "a/tiny/S01_sess01.f32"));

  CHECK(run_cli({"synth", "--config", (dir / "spec.json").string(), "--out",
                 (dir / "b").string()}) == 0);
  CHECK(slurp(dir / "a/tiny/S01_sess01.f32") == slurp(dir / "b/tiny/S01_sess01.f32"));
  CHECK(slurp(dir / "a/tiny/S01_sess01.json") == slurp(dir / "b/tiny/S01_sess01.json"));

  // --seed overrides the spec
  CHECK(run_cli({"synth", "--config", (dir / "spec.json").string(), "--out",
                 (dir / "c").string(), "--seed", "99"}) == 0);
  CHECK(slurp(dir / "a/tiny/S01_sess01.f32") != slurp(dir / "c/tiny/S01_sess01.f32"));
}

TEST_CASE("synth with an empty class list exits 2") {
  const fs::path dir = fresh_dir("synth_bad");
  auto cfg = small_synth_config();
  cfg["classes"] = ordered_json::array();
  write_json(dir / "spec.json", cfg);
  CHECK(run_cli({"synth", "--config", (dir / "spec.json").string(), "--out", dir.string()}) == 2);
}

TEST_CASE("inspect reports the idle-dominated transformation") {
  const fs::path dir = fresh_dir("inspect");
  // 20 s recording with one 4 s cue
  Recording rec;
  rec.subject_id = "S01";
  rec.session_id = "sess01";
  rec.sample_rate_hz = 100.0;
  rec.channel_names = {"C1"};
  rec.samples = Eigen::MatrixXd::Random(1, 2000);
  rec.events = {{400, 400, "left"}};
  write_recording(rec, dir / "rec.json");

  CHECK(run_cli({"inspect", (dir / "rec.json").string(), "--format", "json"}) == 0);

  // window longer than the recording: config error
  CHECK(run_cli({"inspect", (dir / "rec.json").string(), "--window-seconds", "100"}) == 2);

  // data error: missing file
  CHECK(run_cli({"inspect", (dir / "missing.json").string()}) == 3);
}

TEST_CASE("run executes a config and is reproducible modulo timings") {
  const fs::path dir = fresh_dir("run");
  ordered_json cfg;
  cfg["synth"] = small_synth_config(11);
  cfg["pipelines"] = {"mdm", "csp_lda"};
  cfg["mode"] = "pseudo_online";
  cfg["protocol"] = "within_session";
  cfg["inner_folds"] = 3;
  cfg["window"] = {{"window_seconds", 2.0}, {"overlap_fraction", 0.5}};
  write_json(dir / "run.json", cfg);

  CHECK(run_cli({"run", "--config", (dir / "run.json").string(), "--out",
                 (dir / "out1").string()}) == 0);
  CHECK(fs::exists(dir / "out1/results.csv"));
  CHECK(fs::exists(dir / "out1/results.json"));
  CHECK(fs::exists(dir / "out1/skips.json"));

  const auto first = read_results(dir / "out1/results.csv");
  REQUIRE(first.size() == 2);

  CHECK(run_cli({"run", "--config", (dir / "run.json").string(), "--out",
                 (dir / "out2").string(), "--jobs", "2"}) == 0);
  const auto second = read_results(dir / "out2/results.csv");
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].pipeline_id == second[i].pipeline_id);
    CHECK(first[i].nmcc == second[i].nmcc);
    CHECK(first[i].accuracy == second[i].accuracy);
    CHECK(first[i].kappa == second[i].kappa);
    CHECK(first[i].itr_bits_per_min == second[i].itr_bits_per_min);
  }
}

TEST_CASE("run rejects unknown pipelines before evaluating") {
  const fs::path dir = fresh_dir("run_bad");
  ordered_json cfg;
  cfg["synth"] = small_synth_config();
  cfg["pipelines"] = {"mdm", "definitely_not_real"};
  write_json(dir / "run.json", cfg);
  CHECK(run_cli({"run", "--config", (dir / "run.json").string(), "--out",
                 (dir / "out").string()}) == 2);
  CHECK_FALSE(fs::exists(dir / "out/results.csv"));
}

TEST_CASE("run can read datasets back from container files") {
  const fs::path dir = fresh_dir("run_files");
  write_json(dir / "spec.json", small_synth_config(13));
  REQUIRE(run_cli({"synth", "--config", (dir / "spec.json").string(), "--out",
                   dir.string()}) == 0);

  ordered_json cfg;
  cfg["datasets"] = {(dir / "tiny/index.json").string()};
  cfg["pipelines"] = {"mdm"};
  cfg["inner_folds"] = 3;
  write_json(dir / "run.json", cfg);
  CHECK(run_cli({"run", "--config", (dir / "run.json").string(), "--out",
                 (dir / "out").string()}) == 0);
  const auto records = read_results(dir / "out/results.json");
  REQUIRE(records.size() == 1);
  CHECK(records[0].dataset_id == "tiny");
}

TEST_CASE("report aggregates results and verifies against a hand check") {
  const fs::path dir = fresh_dir("report");
  std::vector<EvalRecord> records;
  const double scores_a[3] = {0.7, 0.8, 0.6};
  const double scores_b[3] = {0.6, 0.6, 0.5};
  for (int s = 0; s < 3; ++s) {
    EvalRecord r;
    r.dataset_id = "ds";
    r.subject_id = "S" + std::to_string(s + 1);
    r.session_id = "sess01";
    r.mode = EvalMode::pseudo_online;
    r.protocol = Protocol::within_session;
    r.n_train = 8;
    r.n_test = 2;
    r.pipeline_id = "alpha";
    r.nmcc = scores_a[s];
    records.push_back(r);
    r.pipeline_id = "beta";
    r.nmcc = scores_b[s];
    records.push_back(r);
  }
  write_results(records, dir / "results.csv", ResultsFormat::csv);

  CHECK(run_cli({"report", (dir / "results.csv").string(), "--out", (dir / "rep").string()}) ==
        0);
  const std::string summary = slurp(dir / "rep/summary.csv");
  // alpha: mean 0.7, sample std 0.1; beta: mean 0.566667
  CHECK(summary.find("ds,alpha,0.7,0.1,3") != std::string::npos);
  CHECK(summary.find("ds,beta,0.566667,0.057735,3") != std::string::npos);
  CHECK(fs::exists(dir / "rep/comparisons.json"));
  CHECK(fs::exists(dir / "rep/long.csv"));

  const std::string long_csv = slurp(dir / "rep/long.csv");
  CHECK(long_csv.find("dataset,subject,session,pipeline,mode,protocol,nmcc,accuracy,kappa,itr") !=
        std::string::npos);

  // comparisons carry the smd of the hand-computed pair
  std::ifstream cj(dir / "rep/comparisons.json");
  ordered_json comparisons;
  cj >> comparisons;
  REQUIRE(comparisons.is_array());
  REQUIRE(comparisons.size() == 1);
  bool found = false;
  for (const auto& cell : comparisons[0]["datasets"][0]["cells"]) {
    if (cell["pipeline_a"] == "alpha" && cell["pipeline_b"] == "beta") {
      CHECK(std::abs(cell["smd"].get<double>() - 2.309401076758503) < 1e-9);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("report joins modes side by side") {
  const fs::path dir = fresh_dir("report_modes");
  auto make = [&](EvalMode mode, double score) {
    std::vector<EvalRecord> records;
    EvalRecord r;
    r.dataset_id = "ds";
    r.subject_id = "S1";
    r.session_id = "sess01";
    r.pipeline_id = "alpha";
    r.mode = mode;
    r.protocol = Protocol::within_session;
    r.nmcc = score;
    r.n_train = 8;
    r.n_test = 2;
    records.push_back(r);
    return records;
  };
  write_results(make(EvalMode::pseudo_online, 0.6), dir / "pseudo.csv", ResultsFormat::csv);
  write_results(make(EvalMode::offline, 0.9), dir / "offline.csv", ResultsFormat::csv);

  CHECK(run_cli({"report", (dir / "pseudo.csv").string(), (dir / "offline.csv").string(),
                 "--out", (dir / "rep").string()}) == 0);
  const std::string summary = slurp(dir / "rep/summary.csv");
  CHECK(summary.find("pseudo_online_nmcc_mean") != std::string::npos);
  CHECK(summary.find("offline_nmcc_mean") != std::string::npos);
  CHECK(summary.find("ds,alpha,0.6,0,1,0.9,0,1") != std::string::npos);
}

TEST_CASE("report with no inputs or a bad schema fails") {
  const fs::path dir = fresh_dir("report_bad");
  CHECK(run_cli({"report"}) == 2);  // missing required positional

  std::ofstream bad(dir / "bad.csv");
  bad << "this,is,not,results\n1,2,3,4\n";
  bad.close();
  CHECK(run_cli({"report", (dir / "bad.csv").string(), "--out", dir.string()}) == 3);
}

TEST_CASE("unknown subcommand or missing config exits 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"synth"}) == 2);  // --config required
  CHECK(run_cli({"run", "--config", "/nonexistent/config.json"}) == 3);
}

TEST_CASE("PSEUDOBENCH_JOBS provides the default job count") {
  const fs::path dir = fresh_dir("env_jobs");
  ordered_json cfg;
  cfg["synth"] = small_synth_config(17);
  cfg["pipelines"] = {"mdm"};
  cfg["inner_folds"] = 3;
  write_json(dir / "run.json", cfg);

  setenv("PSEUDOBENCH_JOBS", "2", 1);
  CHECK(run_cli({"run", "--config", (dir / "run.json").string(), "--out",
                 (dir / "out").string()}) == 0);
  unsetenv("PSEUDOBENCH_JOBS");
  CHECK(fs::exists(dir / "out/results.csv"));
}
