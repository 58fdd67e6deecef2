#pragma once

// Experiment matrix: enumerate (view, featurizer, model) configurations, run
// each one through the fixed leakage-safe pipeline, aggregate reports, rank
// views per road class, and emit results as CSV / JSON / markdown.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashsev/adaboost.hpp"
#include "crashsev/eval.hpp"
#include "crashsev/forest.hpp"
#include "crashsev/gbt.hpp"
#include "crashsev/ingest.hpp"
#include "crashsev/smote.hpp"
#include "crashsev/text.hpp"
#include "crashsev/types.hpp"

namespace crashsev {

enum class Featurizer : int { None = 0, Tfidf = 1, W2v = 2 };
enum class ModelKind : int { RandomForest = 0, AdaBoost = 1, Gbt = 2 };

const char* featurizer_name(Featurizer f);
const char* model_name(ModelKind m);
std::optional<Featurizer> featurizer_from_name(std::string_view s);
std::optional<ModelKind> model_from_name(std::string_view s);

struct ExperimentConfig {
  std::string view_id;
  Featurizer featurizer = Featurizer::None;
  ModelKind model = ModelKind::RandomForest;
  std::uint64_t master_seed = 0;
  std::uint64_t config_seed = 0;
  bool skipped = false;
  std::string skip_reason;

  std::string id() const;  // file-safe "<view>__<featurizer>__<model>"
};

// Stable across runs and platforms; depends only on the named parts, so one
// config's stream never shifts when others are added or run concurrently.
std::uint64_t stable_config_seed(std::uint64_t master_seed,
                                 const std::string& view_id, Featurizer f,
                                 ModelKind m);

// Every hyperparameter the pipeline resolves, recorded in each run manifest.
struct PipelineDefaults {
  double drop_threshold = 0.5;
  std::array<double, 3> split_proportions = {0.70, 0.15, 0.15};
  int min_per_class = 10;
  SmoteParams smote;            // seed field ignored; streams derive per config
  int tfidf_max_vocab = 500;
  W2vParams w2v;                // seed field ignored likewise
  int top_k_features = 100;
  int importance_trees = 200;
  RandomForestParams forest;
  AdaBoostParams adaboost;
  GbtParams gbt;
  // Validation-selected grid over eta x max_depth for the boosted model;
  // early stopping applies inside every fit.
  bool gbt_grid = true;
  std::vector<double> gbt_grid_eta = {0.05, 0.1};
  std::vector<int> gbt_grid_depth = {4, 6};

  nlohmann::json to_json() const;
  static PipelineDefaults from_json(const nlohmann::json& j);
};

struct DataBundle {
  std::vector<CrashRecord> records;  // classified (road_class set)
  std::vector<DatasetView> views;    // screened
  SchemaConfig schema;
};

// 17 x {tfidf, w2v} x {forest, adaboost, gbt}; include_baseline adds the
// featurizer-free counterparts. Untrainable views stay enumerated but are
// marked skipped. Order is (view, featurizer, model).
std::vector<ExperimentConfig> enumerate_experiments(
    const std::vector<DatasetView>& views, bool include_baseline,
    std::uint64_t master_seed);

struct RunResult {
  ExperimentConfig config;
  bool ok = false;
  std::string error;  // set when a stage failed; names the stage
  EvalReport report;
  nlohmann::json manifest;
  std::vector<std::string> test_ids;
  std::vector<int> y_true;
  std::vector<int> y_pred;
};

inline constexpr const char* kStageOrder[] = {
    "restrict_view",  "clean_features", "encode",          "stratified_split",
    "fit_featurizer", "select_features", "fuse",           "smote",
    "train",          "evaluate"};

// One configuration end to end. Text models and SMOTE see training rows
// only; the test partition is evaluated exactly once. Throws DataError
// naming the failing stage.
RunResult run_experiment(const ExperimentConfig& config, const DataBundle& data,
                         const PipelineDefaults& defaults, int n_threads = 1);

// Runs trainable configs (jobs-way parallel, deterministic per config);
// failures are captured per config rather than aborting the matrix.
std::vector<RunResult> run_matrix(const std::vector<ExperimentConfig>& configs,
                                  const DataBundle& data,
                                  const PipelineDefaults& defaults, int jobs = 1,
                                  bool progress = false);

// Manifest without its wall-clock section, the part expected to be
// byte-identical across reruns.
nlohmann::json manifest_reproducible_part(const nlohmann::json& manifest);

struct RankTable {
  Featurizer featurizer = Featurizer::Tfidf;
  std::map<RoadClass, std::vector<ViewScore>> ranked;
};

// Per featurizer, per road class: the covering views ranked by their best
// config's macro F1. Views without a successful run are omitted.
std::vector<RankTable> compute_rankings(const std::vector<RunResult>& results,
                                        const std::vector<DatasetView>& views);

// Winner per view: highest macro F1; ties prefer the boosted model, then the
// forest, then AdaBoost, then TF-IDF over embeddings over none.
std::vector<const RunResult*> best_per_view(
    const std::vector<RunResult>& results);

enum class ReportFormat { Csv, Json, Markdown };

std::string emit_report(const std::vector<RunResult>& results,
                        const std::vector<RankTable>& rankings,
                        ReportFormat format);

// Inverse of the CSV emission for the metric fields; round-trips losslessly.
std::vector<RunResult> parse_results_csv(const std::string& text);

}  // namespace crashsev
