// Command-line front end: synthetic data generation, ingest/join, view
// inspection, the experiment matrix, ranking, and ISS validation.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crashsev/error.hpp"
#include "crashsev/eval.hpp"
#include "crashsev/harness.hpp"
#include "crashsev/ingest.hpp"
#include "crashsev/io.hpp"
#include "crashsev/prep.hpp"
#include "crashsev/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crashsev;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SchemaConfig load_schema_or_default(const std::string& path) {
  if (path.empty()) return SchemaConfig{};
  return SchemaConfig::load(path);
}

void write_crashes_csv(const std::string& path,
                       const std::vector<CrashRecord>& records,
                       const SchemaConfig& schema) {
  CsvTable t;
  t.header = {schema.crash_id_col, schema.route_col, schema.milepoint_col,
              schema.year_col, schema.severity_col};
  for (const auto& c : schema.categorical_cols) t.header.push_back(c);
  for (const auto& c : schema.numeric_cols) t.header.push_back(c);
  t.header.push_back(schema.narrative_col);
  for (const auto& r : records) {
    std::vector<std::string> row = {r.record_id, r.route_id,
                                    fmt_double(r.milepoint),
                                    std::to_string(r.year),
                                    severity_name(r.severity)};
    for (const auto& c : schema.categorical_cols) {
      const auto it = r.categorical.find(c);
      row.push_back(it == r.categorical.end() ? "" : it->second);
    }
    for (const auto& c : schema.numeric_cols) {
      const auto it = r.numeric.find(c);
      row.push_back(it == r.numeric.end() ? "" : fmt_double(it->second));
    }
    row.push_back(r.narrative);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void write_segments_csv(const std::string& path,
                        const std::vector<RoadSegment>& segments,
                        const SchemaConfig& schema) {
  CsvTable t;
  t.header = {schema.seg_route_col,     schema.seg_bmp_col,
              schema.seg_emp_col,       schema.seg_urban_col,
              schema.seg_func_class_col, schema.seg_lanes_col,
              schema.seg_median_col,    schema.seg_speed_col,
              schema.seg_aadt_col};
  for (const auto& s : segments) {
    t.rows.push_back({s.route_id, fmt_double(s.bmp), fmt_double(s.emp),
                      s.urban ? "urban" : "rural", s.functional_class,
                      std::to_string(s.lanes),
                      s.median_divided ? "divided" : "undivided",
                      s.speed_limit ? fmt_double(*s.speed_limit) : "",
                      s.aadt ? fmt_double(*s.aadt) : ""});
  }
  write_csv(path, t);
}

std::vector<DatasetView> screened_views(const std::vector<CrashRecord>& records,
                                        int min_per_class) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(static_cast<int>(r.severity));
  std::vector<DatasetView> views = build_dataset_views(records);
  for (auto& v : views) v = screen_view(v, labels, min_per_class);
  return views;
}

int cmd_synth(const std::string& params_path, std::uint64_t seed,
              const std::string& out_dir) {
  SynthParams params;
  if (!params_path.empty()) {
    params = SynthParams::from_json(json::parse(read_text_file(params_path)));
  }
  const SynthData data = generate_synthetic(params, seed);
  const SchemaConfig schema = synth_schema();

  fs::create_directories(out_dir);
  write_crashes_csv(out_dir + "/crashes.csv", data.records, schema);
  write_segments_csv(out_dir + "/segments.csv", data.segments, schema);
  if (!data.iss.empty()) {
    CsvTable iss;
    iss.header = {"record_id", "iss"};
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      iss.rows.push_back(
          {data.records[i].record_id, std::to_string(data.iss[i])});
    }
    write_csv(out_dir + "/iss.csv", iss);
  }
  schema.save(out_dir + "/schema.json");
  json echo = params.to_json();
  echo["seed"] = seed;
  write_text_file(out_dir + "/params.json", echo.dump(2) + "\n");

  std::printf("wrote %zu crash records, %zu segments%s to %s\n",
              data.records.size(), data.segments.size(),
              data.iss.empty() ? "" : ", linked injury scores",
              out_dir.c_str());
  return 0;
}

int cmd_ingest(const std::string& crashes_path, const std::string& segments_path,
               const std::string& schema_path, const std::string& out_dir) {
  const SchemaConfig schema = load_schema_or_default(schema_path);
  ParseDiagnostics crash_diag, seg_diag;
  const auto crashes = parse_crash_csv(crashes_path, schema, &crash_diag);
  const auto segments = parse_segments_csv(segments_path, schema, &seg_diag);

  JoinDiagnostics join_diag;
  auto joined = linear_join(crashes, segments, schema.police_speed_field,
                            &join_diag);
  assign_road_classes(joined, schema);

  fs::create_directories(out_dir);
  write_joined_csv(out_dir + "/joined.csv", joined, schema);
  schema.save(out_dir + "/schema.json");

  json report;
  report["crashes_parsed"] = crashes.size();
  report["rows_dropped_blank_severity"] = crash_diag.rows_dropped_blank_severity;
  report["rows_skipped_bad"] = crash_diag.rows_skipped_bad;
  report["segments_parsed"] = segments.size();
  report["segments_rejected"] = seg_diag.segments_rejected;
  report["matched"] = join_diag.matched;
  report["unmatched"] = join_diag.unmatched;
  report["speed_discrepancies"] = join_diag.speed_discrepancies;
  report["attribute_conflicts"] = join_diag.attribute_conflicts;
  report["overlapping_segment_pairs"] = join_diag.overlapping_segment_pairs;
  report["messages"] = json::array();
  for (const auto& m : crash_diag.messages) report["messages"].push_back(m);
  for (const auto& m : seg_diag.messages) report["messages"].push_back(m);
  write_text_file(out_dir + "/ingest_report.json", report.dump(2) + "\n");

  std::printf("joined %zu of %zu crash records (%zu unmatched) onto %zu "
              "segments; %zu speed discrepancies\n",
              join_diag.matched, crashes.size(), join_diag.unmatched,
              segments.size(), join_diag.speed_discrepancies);
  return 0;
}

json views_manifest(const std::vector<DatasetView>& views) {
  json out = json::array();
  for (const auto& v : views) {
    json members = json::array();
    for (const RoadClass rc : v.members) members.push_back(road_class_name(rc));
    out.push_back({{"view_id", v.view_id},
                   {"name", v.name},
                   {"scheme", static_cast<int>(v.scheme)},
                   {"members", std::move(members)},
                   {"records", v.record_ids.size()},
                   {"trainable", v.trainable},
                   {"skip_reason", v.skip_reason}});
  }
  return out;
}

int cmd_views(const std::string& data_path, const std::string& schema_path,
              int min_per_class, const std::string& out_path) {
  const SchemaConfig schema = load_schema_or_default(schema_path);
  const auto records = load_joined_csv(data_path, schema);
  const auto views = screened_views(records, min_per_class);
  const std::string text = views_manifest(views).dump(2) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

int cmd_run_matrix(const std::string& data_path, const std::string& schema_path,
                   const std::string& config_path, std::uint64_t seed, int jobs,
                   bool baseline, const std::string& out_dir, bool quiet) {
  DataBundle data;
  data.schema = load_schema_or_default(schema_path);
  data.records = load_joined_csv(data_path, data.schema);

  PipelineDefaults defaults;
  if (!config_path.empty()) {
    defaults = PipelineDefaults::from_json(json::parse(read_text_file(config_path)));
  }
  data.views = screened_views(data.records, defaults.min_per_class);

  const auto configs = enumerate_experiments(data.views, baseline, seed);
  const auto results = run_matrix(configs, data, defaults, jobs, !quiet);
  const auto rankings = compute_rankings(results, data.views);

  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/manifests");
  fs::create_directories(out_dir + "/predictions");
  write_text_file(out_dir + "/results.csv",
                  emit_report(results, rankings, ReportFormat::Csv));
  write_text_file(out_dir + "/results.json",
                  emit_report(results, rankings, ReportFormat::Json));
  write_text_file(out_dir + "/report.md",
                  emit_report(results, rankings, ReportFormat::Markdown));

  std::size_t ok = 0, failed = 0, skipped = 0;
  for (const auto& r : results) {
    if (r.config.skipped) {
      ++skipped;
      continue;
    }
    if (!r.ok) {
      ++failed;
      std::fprintf(stderr, "failed: %s: %s\n", r.config.id().c_str(),
                   r.error.c_str());
      continue;
    }
    ++ok;
    write_text_file(out_dir + "/manifests/" + r.config.id() + ".json",
                    r.manifest.dump(2) + "\n");
    CsvTable preds;
    preds.header = {"record_id", "y_true", "y_pred"};
    for (std::size_t i = 0; i < r.test_ids.size(); ++i) {
      preds.rows.push_back({r.test_ids[i], std::to_string(r.y_true[i]),
                            std::to_string(r.y_pred[i])});
    }
    write_csv(out_dir + "/predictions/" + r.config.id() + ".csv", preds);
  }

  std::printf("matrix complete: %zu ok, %zu failed, %zu skipped; reports in %s\n",
              ok, failed, skipped, out_dir.c_str());
  if (ok == 0) throw DataError("no configuration completed successfully");
  return 0;
}

int cmd_rank(const std::string& results_path, const std::string& data_path,
             const std::string& schema_path, int min_per_class,
             const std::string& format, const std::string& out_path) {
  const auto results = parse_results_csv(read_text_file(results_path));
  const SchemaConfig schema = load_schema_or_default(schema_path);
  const auto records = load_joined_csv(data_path, schema);
  const auto views = screened_views(records, min_per_class);
  const auto rankings = compute_rankings(results, views);

  ReportFormat fmt = ReportFormat::Markdown;
  if (format == "json") fmt = ReportFormat::Json;
  else if (format == "csv") fmt = ReportFormat::Csv;
  else if (format != "markdown" && format != "md") {
    throw DataError("unknown report format " + format);
  }
  const std::string text = emit_report(results, rankings, fmt);
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

int cmd_validate_iss(const std::string& predictions_path,
                     const std::string& iss_path, const std::string& out_path) {
  const CsvTable preds = read_csv(predictions_path);
  const CsvTable iss = read_csv(iss_path);

  const int p_id = preds.find_col("record_id");
  int p_pred = preds.find_col("y_pred");
  if (p_pred < 0) p_pred = preds.find_col("predicted");
  if (p_id < 0 || p_pred < 0) {
    throw DataError("predictions file needs record_id and y_pred columns");
  }
  const int i_id = iss.find_col("record_id");
  const int i_iss = iss.find_col("iss");
  if (i_id < 0 || i_iss < 0) {
    throw DataError("injury-score file needs record_id and iss columns");
  }

  std::map<std::string, int> iss_by_id;
  for (const auto& row : iss.rows) {
    try {
      iss_by_id[row[i_id]] = std::stoi(row[i_iss]);
    } catch (const std::exception&) {
      throw DataError("bad injury score '" + row[i_iss] + "' for record " +
                      row[i_id]);
    }
  }

  std::vector<IssRecord> linked;
  std::size_t unlinked = 0;
  for (const auto& row : preds.rows) {
    const auto it = iss_by_id.find(row[p_id]);
    if (it == iss_by_id.end()) {
      ++unlinked;
      continue;
    }
    int code = 0;
    try {
      code = std::stoi(row[p_pred]);
    } catch (const std::exception&) {
      throw DataError("bad predicted label '" + row[p_pred] + "' for record " +
                      row[p_id]);
    }
    const auto label = severity_from_code(code);
    if (!label) {
      throw DataError("predicted label out of range for record " + row[p_id]);
    }
    linked.push_back(IssRecord{*label, it->second});
  }
  if (linked.empty()) {
    throw DataError("no prediction rows could be linked to injury scores");
  }

  const IssValidation v = iss_validate(linked);
  std::printf("%s", v.to_table().c_str());
  std::printf("linked %zu rows (%zu without scores); severity-ISS ordering %s\n",
              linked.size(), unlinked,
              v.monotonic ? "monotonic" : "NOT monotonic");
  if (!out_path.empty()) write_text_file(out_path, v.to_json().dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crash injury-severity pipeline"};
  app.require_subcommand(1);

  std::string params_path, out_dir, crashes_path, segments_path, schema_path;
  std::string data_path, config_path, results_path, iss_path, out_path;
  std::string format = "markdown";
  std::uint64_t seed = 42;
  int jobs = 1;
  int min_per_class = 10;
  bool baseline = false;
  bool quiet = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--params", params_path, "Generator parameter JSON");
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* ingest = app.add_subcommand("ingest", "Join crash and segment files");
  ingest->add_option("--crashes", crashes_path, "Crash CSV")->required();
  ingest->add_option("--segments", segments_path, "Segment inventory CSV")
      ->required();
  ingest->add_option("--schema", schema_path, "Column-mapping JSON");
  ingest->add_option("--out", out_dir, "Output directory")->required();

  auto* views = app.add_subcommand("views", "Show the 17 dataset views");
  views->add_option("--data", data_path, "Joined dataset CSV")->required();
  views->add_option("--schema", schema_path, "Column-mapping JSON");
  views->add_option("--min-per-class", min_per_class,
                    "Trainability threshold per severity class");
  views->add_option("--out", out_path, "Write manifest here instead of stdout");

  auto* matrix = app.add_subcommand("run-matrix", "Run the experiment matrix");
  matrix->add_option("--data", data_path, "Joined dataset CSV")->required();
  matrix->add_option("--schema", schema_path, "Column-mapping JSON");
  matrix->add_option("--config", config_path, "Pipeline defaults JSON");
  matrix->add_option("--seed", seed, "Master seed");
  matrix->add_option("--jobs", jobs, "Parallel configurations");
  matrix->add_flag("--baseline", baseline, "Also run featurizer-free configs");
  matrix->add_option("--out-dir", out_dir, "Report directory")->required();
  matrix->add_flag("--quiet", quiet, "Suppress per-config progress");

  auto* rank = app.add_subcommand("rank", "Rank views from a results file");
  rank->add_option("--results", results_path, "results.csv from run-matrix")
      ->required();
  rank->add_option("--data", data_path, "Joined dataset CSV")->required();
  rank->add_option("--schema", schema_path, "Column-mapping JSON");
  rank->add_option("--min-per-class", min_per_class,
                   "Trainability threshold per severity class");
  rank->add_option("--format", format, "markdown, json, or csv");
  rank->add_option("--out", out_path, "Write report here instead of stdout");

  auto* validate = app.add_subcommand("validate-iss",
                                      "Check predictions against injury scores");
  validate->add_option("--predictions", results_path,
                       "Prediction CSV (record_id, y_pred)")
      ->required();
  validate->add_option("--iss-file", iss_path, "Injury-score CSV (record_id, iss)")
      ->required();
  validate->add_option("--out", out_path, "Write cross-tab JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(params_path, seed, out_dir);
    if (ingest->parsed()) {
      return cmd_ingest(crashes_path, segments_path, schema_path, out_dir);
    }
    if (views->parsed()) {
      return cmd_views(data_path, schema_path, min_per_class, out_path);
    }
    if (matrix->parsed()) {
      return cmd_run_matrix(data_path, schema_path, config_path, seed, jobs,
                            baseline, out_dir, quiet);
    }
    if (rank->parsed()) {
      return cmd_rank(results_path, data_path, schema_path, min_per_class,
                      format, out_path);
    }
    if (validate->parsed()) {
      return cmd_validate_iss(results_path, iss_path, out_path);
    }
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 1;
}
