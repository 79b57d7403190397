#include "pseudobench/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pseudobench/container.hpp"
#include "pseudobench/epoching.hpp"
#include "pseudobench/errors.hpp"
#include "pseudobench/evaluation.hpp"
#include "pseudobench/metrics.hpp"
#include "pseudobench/stats.hpp"
#include "pseudobench/synth.hpp"

namespace pseudobench {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

ordered_json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  try {
    ordered_json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  if (!out) throw io_error("write failed: " + path.string());
}

template <typename T>
T json_or(const ordered_json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw parameter_error(std::string("config field '") + key + "' has wrong type");
  }
}

SynthSpec synth_spec_from_json(const ordered_json& j) {
  SynthSpec spec;
  spec.n_subjects = json_or(j, "n_subjects", spec.n_subjects);
  spec.n_sessions = json_or(j, "n_sessions", spec.n_sessions);
  spec.n_channels = json_or(j, "n_channels", spec.n_channels);
  spec.n_trials_per_class = json_or(j, "n_trials_per_class", spec.n_trials_per_class);
  spec.classes = json_or(j, "classes", spec.classes);
  spec.sample_rate_hz = json_or(j, "sample_rate_hz", spec.sample_rate_hz);
  spec.trial_seconds = json_or(j, "trial_seconds", spec.trial_seconds);
  spec.gap_seconds = json_or(j, "gap_seconds", spec.gap_seconds);
  spec.separability = json_or(j, "separability", spec.separability);
  spec.drift = json_or(j, "drift", spec.drift);
  spec.seed = json_or(j, "seed", spec.seed);
  return spec;
}

WindowConfig window_from_json(const ordered_json& j) {
  WindowConfig w;
  w.window_seconds = json_or(j, "window_seconds", w.window_seconds);
  w.overlap_fraction = json_or(j, "overlap_fraction", w.overlap_fraction);
  return w;
}

BandSpec band_from_json(const ordered_json& j) {
  BandSpec b;
  b.low_hz = json_or(j, "low_hz", b.low_hz);
  b.high_hz = json_or(j, "high_hz", b.high_hz);
  b.order = json_or(j, "order", b.order);
  return b;
}

int resolve_jobs(int jobs_flag) {
  int jobs = jobs_flag;
  if (jobs == 0) {
    if (const char* env = std::getenv("PSEUDOBENCH_JOBS")) jobs = std::atoi(env);
  }
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, jobs);
}

std::string subject_session_stem(const Recording& rec) {
  return rec.subject_id + "_" + rec.session_id;
}

// ---- synth ---------------------------------------------------------------

int cmd_synth(const fs::path& config_path, const fs::path& out_dir,
              std::optional<std::int64_t> seed) {
  const ordered_json cfg = load_json(config_path);
  SynthSpec spec = synth_spec_from_json(cfg);
  if (seed) spec.seed = *seed;
  const std::string dataset_id = json_or<std::string>(cfg, "dataset_id", "synth");

  const auto recordings = generate(spec);
  const fs::path dir = out_dir / dataset_id;
  fs::create_directories(dir);

  ordered_json index;
  index["dataset_id"] = dataset_id;
  index["recordings"] = ordered_json::array();
  for (const Recording& rec : recordings) {
    const std::string name = subject_session_stem(rec) + ".json";
    write_recording(rec, dir / name);
    index["recordings"].push_back(name);
  }
  write_text(dir / "index.json", index.dump(2) + "\n");

  std::set<std::string> subjects, sessions;
  for (const Recording& r : recordings) {
    subjects.insert(r.subject_id);
    sessions.insert(r.session_id);
  }
  std::cout << "dataset " << dataset_id << ": " << subjects.size() << " subject(s), "
            << sessions.size() << " session(s) each, " << spec.classes.size()
            << " class(es), " << recordings.size() << " recording(s) -> " << dir.string()
            << "\n";
  return 0;
}

// ---- inspect ---------------------------------------------------------------

int cmd_inspect(const fs::path& recording_path, const WindowConfig& window,
                const std::string& format) {
  const Recording rec = read_recording(recording_path);
  const Recording tiled = inject_idle(rec);
  const WindowSet windows = slide_windows(tiled, window);

  std::map<std::string, std::int64_t> counts;
  std::int64_t mixed = 0, kept_first = 0, kept_second = 0, ties = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    ++counts[windows.labels[i]];
    const auto d = label_window_decision(windows.onsets[i], windows.window_len_samples,
                                         tiled.events);
    if (d.events_spanned == 2) {
      ++mixed;
      if (d.tie)
        ++ties;
      else if (d.kept_first)
        ++kept_first;
      else
        ++kept_second;
    }
  }
  std::int64_t largest = 0, smallest = std::numeric_limits<std::int64_t>::max();
  for (const auto& [label, count] : counts) {
    largest = std::max(largest, count);
    smallest = std::min(smallest, count);
  }
  const double imbalance = static_cast<double>(largest) / static_cast<double>(smallest);

  ordered_json report;
  report["recording"] = recording_path.string();
  report["window_seconds"] = window.window_seconds;
  report["overlap_fraction"] = window.overlap_fraction;
  report["n_windows"] = static_cast<std::int64_t>(windows.size());
  report["class_counts"] = ordered_json::object();
  for (const auto& [label, count] : counts) report["class_counts"][label] = count;
  report["imbalance_ratio"] = imbalance;  // largest class count / smallest
  report["mixed_windows"] =
      ordered_json{{"total", mixed},
                   {"kept_first_event", kept_first},
                   {"kept_second_event", kept_second},
                   {"ties_resolved_to_second", ties}};

  if (format == "json") {
    std::cout << report.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "label,count\n";
    for (const auto& [label, count] : counts) std::cout << label << ',' << count << "\n";
  } else {
    std::cout << "recording " << recording_path.string() << ": " << windows.size()
              << " windows of " << window.window_seconds << " s at "
              << window.overlap_fraction * 100 << "% overlap\n";
    for (const auto& [label, count] : counts)
      std::cout << "  " << label << ": " << count << "\n";
    std::cout << "imbalance ratio (largest/smallest): " << imbalance << "\n"
              << "mixed windows: " << mixed << " (first-event majority " << kept_first
              << ", second-event majority " << kept_second << ", ties to second " << ties
              << ")\n";
  }
  return 0;
}

// ---- run -------------------------------------------------------------------

std::vector<Dataset> load_datasets(const ordered_json& cfg,
                                   std::optional<std::int64_t> seed_override,
                                   const fs::path& config_dir) {
  std::vector<Dataset> datasets;
  if (cfg.contains("synth")) {
    SynthSpec spec = synth_spec_from_json(cfg["synth"]);
    if (seed_override) spec.seed = *seed_override;
    Dataset ds;
    ds.id = json_or<std::string>(cfg["synth"], "dataset_id", "synth");
    ds.recordings = generate(spec);
    datasets.push_back(std::move(ds));
  }
  for (const std::string& index_path :
       json_or(cfg, "datasets", std::vector<std::string>{})) {
    fs::path p(index_path);
    if (p.is_relative()) p = config_dir / p;
    const ordered_json index = load_json(p);
    Dataset ds;
    ds.id = json_or<std::string>(index, "dataset_id", p.parent_path().filename().string());
    for (const std::string& rec_name :
         json_or(index, "recordings", std::vector<std::string>{}))
      ds.recordings.push_back(read_recording(p.parent_path() / rec_name));
    if (ds.recordings.empty()) throw format_error("dataset index lists no recordings: " + p.string());
    datasets.push_back(std::move(ds));
  }
  if (datasets.empty()) throw parameter_error("run config names no datasets (keys 'datasets'/'synth')");
  return datasets;
}

EvalConfig eval_config_from_json(const ordered_json& cfg) {
  EvalConfig ec;
  ec.mode = eval_mode_from_string(json_or<std::string>(cfg, "mode", "pseudo_online"));
  const std::string protocol = json_or<std::string>(cfg, "protocol", "within_session");
  if (protocol == "within_session")
    ec.protocol = ProtocolKind::within_session;
  else if (protocol == "cross_session")
    ec.protocol = ProtocolKind::cross_session;
  else
    throw parameter_error("unknown protocol: " + protocol);
  const std::string cv = json_or<std::string>(cfg, "cv_style", "nested");
  if (cv == "nested")
    ec.cv_style = CvStyle::nested;
  else if (cv == "flat")
    ec.cv_style = CvStyle::flat;
  else
    throw parameter_error("unknown cv_style: " + cv);
  ec.train_fraction = json_or(cfg, "train_fraction", ec.train_fraction);
  if (!(ec.train_fraction > 0.0) || !(ec.train_fraction < 1.0))
    throw parameter_error("train_fraction must lie in (0, 1)");
  ec.inner_folds = json_or(cfg, "inner_folds", ec.inner_folds);
  if (ec.inner_folds < 2) throw parameter_error("inner_folds must be >= 2");
  if (cfg.contains("window")) ec.window = window_from_json(cfg["window"]);
  if (cfg.contains("band")) ec.band = band_from_json(cfg["band"]);
  if (cfg.contains("bank")) {
    ec.bank.clear();
    for (const auto& b : cfg["bank"]) ec.bank.push_back(band_from_json(b));
  }
  if (cfg.contains("t_symbol_seconds")) {
    const double t = json_or(cfg, "t_symbol_seconds", 0.0);
    if (!(t > 0.0)) throw parameter_error("t_symbol_seconds must be positive");
    ec.t_symbol_seconds = t;
  }
  ec.seed = json_or(cfg, "seed", ec.seed);
  return ec;
}

int cmd_run(const fs::path& config_path, fs::path out_dir, int jobs_flag,
            std::optional<std::int64_t> seed) {
  const ordered_json cfg = load_json(config_path);

  const auto pipeline_ids = json_or(cfg, "pipelines", std::vector<std::string>{});
  if (pipeline_ids.empty()) throw parameter_error("run config lists no pipelines");
  std::vector<Pipeline> pipelines;
  for (const std::string& id : pipeline_ids) pipelines.push_back(find_pipeline(id));

  EvalConfig ec = eval_config_from_json(cfg);
  if (seed) ec.seed = *seed;
  if (out_dir.empty()) out_dir = json_or<std::string>(cfg, "out_dir", ".");

  const auto datasets = load_datasets(cfg, seed, config_path.parent_path());
  const BenchmarkResult result = run_benchmark(datasets, pipelines, ec, resolve_jobs(jobs_flag));

  fs::create_directories(out_dir);
  if (!result.records.empty()) {
    write_results(result.records, out_dir / "results.csv", ResultsFormat::csv);
    write_results(result.records, out_dir / "results.json", ResultsFormat::json);
  }
  ordered_json skips = ordered_json::array();
  for (const SkipRecord& s : result.skips)
    skips.push_back({{"dataset", s.dataset_id},
                     {"subject", s.subject_id},
                     {"session", s.session_id},
                     {"pipeline", s.pipeline_id},
                     {"reason", s.reason}});
  write_text(out_dir / "skips.json", skips.dump(2) + "\n");

  std::cout << result.records.size() << " record(s), " << result.skips.size()
            << " skip(s) -> " << out_dir.string() << "\n";
  return 0;
}

// ---- report ----------------------------------------------------------------

struct GroupKey {
  std::string dataset;
  std::string pipeline;
  bool operator<(const GroupKey& o) const {
    return std::tie(dataset, pipeline) < std::tie(o.dataset, o.pipeline);
  }
};

std::string csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_report(const std::vector<std::string>& results_paths, fs::path out_dir) {
  if (results_paths.empty()) throw parameter_error("report needs at least one results file");

  std::vector<EvalRecord> records;
  for (const std::string& path : results_paths) {
    std::vector<EvalRecord> part;
    try {
      part = read_results(path);
    } catch (const format_error& e) {
      throw format_error("results file " + path + " rejected: " + e.what());
    }
    records.insert(records.end(), part.begin(), part.end());
  }
  if (records.empty()) throw format_error("no records in the given results files");
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);

  // Per-subject scores (sessions averaged), grouped by mode.
  const std::vector<EvalMode> modes = {EvalMode::pseudo_online, EvalMode::offline};
  std::map<GroupKey, std::map<EvalMode, std::map<std::string, std::pair<double, int>>>> groups;
  for (const EvalRecord& r : records) {
    auto& cell = groups[{r.dataset_id, r.pipeline_id}][r.mode][r.subject_id];
    cell.first += r.nmcc;
    cell.second += 1;
  }

  std::ostringstream table;
  table << "dataset,pipeline";
  for (EvalMode m : modes)
    table << ',' << to_string(m) << "_nmcc_mean," << to_string(m) << "_nmcc_std,"
          << to_string(m) << "_n_subjects";
  table << "\n";
  std::ostringstream pretty;
  for (const auto& [key, by_mode] : groups) {
    table << key.dataset << ',' << key.pipeline;
    pretty << key.dataset << " " << key.pipeline << ":";
    for (EvalMode m : modes) {
      const auto it = by_mode.find(m);
      if (it == by_mode.end()) {
        table << ",,,";
        continue;
      }
      std::vector<double> per_subject;
      for (const auto& [subject, cell] : it->second)
        per_subject.push_back(cell.first / cell.second);
      const double n = static_cast<double>(per_subject.size());
      double mean = 0.0;
      for (double v : per_subject) mean += v;
      mean /= n;
      double sd = 0.0;
      if (per_subject.size() > 1) {
        for (double v : per_subject) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / (n - 1.0));
      }
      table << ',' << csv_double(mean) << ',' << csv_double(sd) << ',' << per_subject.size();
      pretty << "  " << to_string(m) << " " << csv_double(mean) << " +/- " << csv_double(sd)
             << " (n=" << per_subject.size() << ")";
    }
    table << "\n";
    pretty << "\n";
  }
  write_text(out_dir / "summary.csv", table.str());
  std::cout << pretty.str();

  // Pairwise comparisons per (mode, protocol, dataset), plus cross-dataset meta rows.
  ordered_json comparisons = ordered_json::array();
  std::map<std::pair<std::string, std::string>, std::vector<EvalRecord>> by_mode_protocol;
  for (const EvalRecord& r : records)
    by_mode_protocol[{to_string(r.mode), to_string(r.protocol)}].push_back(r);

  for (const auto& [mode_protocol, group_records] : by_mode_protocol) {
    ordered_json group;
    group["mode"] = mode_protocol.first;
    group["protocol"] = mode_protocol.second;
    group["datasets"] = ordered_json::array();

    std::map<std::string, std::vector<EvalRecord>> by_dataset;
    for (const EvalRecord& r : group_records) by_dataset[r.dataset_id].push_back(r);

    // pair -> per-dataset (p, weight = sqrt(n subjects))
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
        meta_inputs;
    for (const auto& [dataset_id, ds_records] : by_dataset) {
      ComparisonMatrix cm;
      try {
        cm = comparison_matrix(ds_records);
      } catch (const error&) {
        continue;  // fewer than two pipelines in this dataset
      }
      ordered_json ds;
      ds["dataset"] = dataset_id;
      ds["pipelines"] = cm.pipelines;
      ds["cells"] = ordered_json::array();
      for (const PairComparison& pc : cm.cells) {
        if (pc.pipeline_a == pc.pipeline_b) continue;
        ordered_json cell;
        cell["pipeline_a"] = pc.pipeline_a;
        cell["pipeline_b"] = pc.pipeline_b;
        cell["n"] = pc.n;
        cell["comparable"] = pc.comparable;
        cell["smd"] = pc.smd ? ordered_json(*pc.smd) : ordered_json(nullptr);
        cell["p_one_tailed"] =
            pc.p_one_tailed ? ordered_json(*pc.p_one_tailed) : ordered_json(nullptr);
        cell["significant"] = pc.significant;
        ds["cells"].push_back(std::move(cell));
        if (pc.comparable && pc.p_one_tailed) {
          auto& [ps, ws] = meta_inputs[{pc.pipeline_a, pc.pipeline_b}];
          ps.push_back(*pc.p_one_tailed);
          ws.push_back(std::sqrt(static_cast<double>(pc.n)));
        }
      }
      group["datasets"].push_back(std::move(ds));
    }

    group["meta"] = ordered_json::array();
    for (const auto& [pair, inputs] : meta_inputs) {
      const MetaResult meta = meta_combine(inputs.first, inputs.second);
      group["meta"].push_back({{"pipeline_a", pair.first},
                               {"pipeline_b", pair.second},
                               {"n_datasets", inputs.first.size()},
                               {"z", meta.z},
                               {"p_one_tailed", meta.p},
                               {"significant", meta.p < 0.05}});
    }
    comparisons.push_back(std::move(group));
  }
  write_text(out_dir / "comparisons.json", comparisons.dump(2) + "\n");

  // Long-format scores for external plotting.
  std::ostringstream long_csv;
  long_csv << "dataset,subject,session,pipeline,mode,protocol,nmcc,accuracy,kappa,itr\n";
  for (const EvalRecord& r : records)
    long_csv << r.dataset_id << ',' << r.subject_id << ',' << r.session_id << ','
             << r.pipeline_id << ',' << to_string(r.mode) << ',' << to_string(r.protocol) << ','
             << csv_double(r.nmcc) << ',' << csv_double(r.accuracy) << ','
             << csv_double(r.kappa) << ',' << csv_double(r.itr_bits_per_min) << "\n";
  write_text(out_dir / "long.csv", long_csv.str());

  std::cout << "report -> " << (out_dir / "summary.csv").string() << ", "
            << (out_dir / "comparisons.json").string() << ", "
            << (out_dir / "long.csv").string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"pseudo-online decoding benchmark engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "text";
  std::int64_t seed_flag = 0;
  bool seed_given = false;
  int jobs = 0;

  auto add_common = [&](CLI::App* cmd, bool with_config) {
    if (with_config) cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_flag, "seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    cmd->add_option("--jobs", jobs, "parallel tasks (0 = PSEUDOBENCH_JOBS or hardware)");
  };

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth_cmd, true);

  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "report the windowing transformation of a recording");
  std::string recording_path;
  double window_seconds = 2.0, overlap = 0.5;
  inspect_cmd->add_option("recording", recording_path, "recording manifest path")->required();
  inspect_cmd->add_option("--window-seconds", window_seconds, "window length in seconds");
  inspect_cmd->add_option("--overlap", overlap, "overlap fraction in [0, 1)");
  inspect_cmd->add_option("--format", format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  CLI::App* run_cmd = app.add_subcommand("run", "run a benchmark described by a config");
  add_common(run_cmd, true);

  CLI::App* report_cmd = app.add_subcommand("report", "aggregate results files");
  std::vector<std::string> results_paths;
  report_cmd->add_option("results", results_paths, "results files (csv or json)")->required();
  report_cmd->add_option("--out", out_dir, "output directory");

  std::vector<const char*> argv;
  argv.push_back("pseudobench");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<std::int64_t> seed;
  if (seed_given) seed = seed_flag;
  try {
    if (synth_cmd->parsed())
      return cmd_synth(config_path, out_dir.empty() ? "." : out_dir, seed);
    if (inspect_cmd->parsed())
      return cmd_inspect(recording_path, WindowConfig{window_seconds, overlap}, format);
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir, jobs, seed);
    if (report_cmd->parsed()) return cmd_report(results_paths, out_dir);
  } catch (const parameter_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace pseudobench
