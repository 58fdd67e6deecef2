#include "crashsev/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/csv.hpp"
#include "crashsev/error.hpp"
#include "crashsev/prep.hpp"
#include "crashsev/rng.hpp"
#include "crashsev/select.hpp"

namespace crashsev {

using nlohmann::json;

const char* featurizer_name(Featurizer f) {
  switch (f) {
    case Featurizer::None: return "none";
    case Featurizer::Tfidf: return "tfidf";
    case Featurizer::W2v: return "w2v";
  }
  return "?";
}

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::AdaBoost: return "adaboost";
    case ModelKind::Gbt: return "gbt";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::optional<Featurizer> featurizer_from_name(std::string_view s) {
  const std::string t = lower(s);
  if (t == "none" || t == "baseline") return Featurizer::None;
  if (t == "tfidf" || t == "tf-idf") return Featurizer::Tfidf;
  if (t == "w2v" || t == "word2vec") return Featurizer::W2v;
  return std::nullopt;
}

std::optional<ModelKind> model_from_name(std::string_view s) {
  const std::string t = lower(s);
  if (t == "random_forest" || t == "rf" || t == "forest") {
    return ModelKind::RandomForest;
  }
  if (t == "adaboost" || t == "ada") return ModelKind::AdaBoost;
  if (t == "gbt" || t == "gradient_boosting" || t == "xgb") return ModelKind::Gbt;
  return std::nullopt;
}

std::string ExperimentConfig::id() const {
  std::string view = view_id;
  std::replace(view.begin(), view.end(), ':', '-');
  return view + "__" + featurizer_name(featurizer) + "__" + model_name(model);
}

std::uint64_t stable_config_seed(std::uint64_t master_seed,
                                 const std::string& view_id, Featurizer f,
                                 ModelKind m) {
  std::uint64_t s = derive_seed(master_seed, view_id);
  s = derive_seed(s, featurizer_name(f));
  s = derive_seed(s, model_name(m));
  return s;
}

json PipelineDefaults::to_json() const {
  json j;
  j["drop_threshold"] = drop_threshold;
  j["split_proportions"] = split_proportions;
  j["min_per_class"] = min_per_class;
  j["smote"] = {{"k_neighbors", smote.k_neighbors},
                {"delta_min", smote.delta_min},
                {"delta_max", smote.delta_max}};
  j["tfidf_max_vocab"] = tfidf_max_vocab;
  j["w2v"] = {{"dim", w2v.dim},           {"window", w2v.window},
              {"negatives", w2v.negatives}, {"epochs", w2v.epochs},
              {"min_count", w2v.min_count}, {"lr_initial", w2v.lr_initial},
              {"lr_floor", w2v.lr_floor},   {"workers", w2v.workers}};
  j["top_k_features"] = top_k_features;
  j["importance_trees"] = importance_trees;
  j["forest"] = {{"n_trees", forest.n_trees},
                 {"features_per_split", forest.features_per_split},
                 {"bootstrap", forest.bootstrap},
                 {"max_depth", forest.max_depth},
                 {"min_samples_leaf", forest.min_samples_leaf}};
  j["adaboost"] = {{"max_stages", adaboost.max_stages},
                   {"weak_max_depth", adaboost.weak_max_depth}};
  j["gbt"] = {{"n_rounds", gbt.n_rounds},
              {"eta", gbt.eta},
              {"lambda_l2", gbt.lambda_l2},
              {"alpha_l1", gbt.alpha_l1},
              {"gamma_min_gain", gbt.gamma_min_gain},
              {"max_depth", gbt.max_depth},
              {"min_samples_leaf", gbt.min_samples_leaf},
              {"base_score", gbt.base_score},
              {"early_stopping_rounds", gbt.early_stopping_rounds}};
  j["gbt_grid"] = gbt_grid;
  j["gbt_grid_eta"] = gbt_grid_eta;
  j["gbt_grid_depth"] = gbt_grid_depth;
  return j;
}

PipelineDefaults PipelineDefaults::from_json(const json& j) {
  PipelineDefaults d;
  if (j.contains("drop_threshold")) d.drop_threshold = j["drop_threshold"].get<double>();
  if (j.contains("split_proportions")) {
    d.split_proportions = j["split_proportions"].get<std::array<double, 3>>();
  }
  if (j.contains("min_per_class")) d.min_per_class = j["min_per_class"].get<int>();
  if (j.contains("smote")) {
    const json& s = j["smote"];
    if (s.contains("k_neighbors")) d.smote.k_neighbors = s["k_neighbors"].get<int>();
    if (s.contains("delta_min")) d.smote.delta_min = s["delta_min"].get<double>();
    if (s.contains("delta_max")) d.smote.delta_max = s["delta_max"].get<double>();
  }
  if (j.contains("tfidf_max_vocab")) {
    d.tfidf_max_vocab = j["tfidf_max_vocab"].get<int>();
  }
  if (j.contains("w2v")) {
    const json& w = j["w2v"];
    if (w.contains("dim")) d.w2v.dim = w["dim"].get<int>();
    if (w.contains("window")) d.w2v.window = w["window"].get<int>();
    if (w.contains("negatives")) d.w2v.negatives = w["negatives"].get<int>();
    if (w.contains("epochs")) d.w2v.epochs = w["epochs"].get<int>();
    if (w.contains("min_count")) d.w2v.min_count = w["min_count"].get<int>();
    if (w.contains("lr_initial")) d.w2v.lr_initial = w["lr_initial"].get<double>();
    if (w.contains("lr_floor")) d.w2v.lr_floor = w["lr_floor"].get<double>();
    if (w.contains("workers")) d.w2v.workers = w["workers"].get<int>();
  }
  if (j.contains("top_k_features")) d.top_k_features = j["top_k_features"].get<int>();
  if (j.contains("importance_trees")) {
    d.importance_trees = j["importance_trees"].get<int>();
  }
  if (j.contains("forest")) {
    const json& f = j["forest"];
    if (f.contains("n_trees")) d.forest.n_trees = f["n_trees"].get<int>();
    if (f.contains("features_per_split")) {
      d.forest.features_per_split = f["features_per_split"].get<int>();
    }
    if (f.contains("bootstrap")) d.forest.bootstrap = f["bootstrap"].get<bool>();
    if (f.contains("max_depth")) d.forest.max_depth = f["max_depth"].get<int>();
    if (f.contains("min_samples_leaf")) {
      d.forest.min_samples_leaf = f["min_samples_leaf"].get<int>();
    }
  }
  if (j.contains("adaboost")) {
    const json& a = j["adaboost"];
    if (a.contains("max_stages")) d.adaboost.max_stages = a["max_stages"].get<int>();
    if (a.contains("weak_max_depth")) {
      d.adaboost.weak_max_depth = a["weak_max_depth"].get<int>();
    }
  }
  if (j.contains("gbt")) {
    const json& g = j["gbt"];
    if (g.contains("n_rounds")) d.gbt.n_rounds = g["n_rounds"].get<int>();
    if (g.contains("eta")) d.gbt.eta = g["eta"].get<double>();
    if (g.contains("lambda_l2")) d.gbt.lambda_l2 = g["lambda_l2"].get<double>();
    if (g.contains("alpha_l1")) d.gbt.alpha_l1 = g["alpha_l1"].get<double>();
    if (g.contains("gamma_min_gain")) {
      d.gbt.gamma_min_gain = g["gamma_min_gain"].get<double>();
    }
    if (g.contains("max_depth")) d.gbt.max_depth = g["max_depth"].get<int>();
    if (g.contains("min_samples_leaf")) {
      d.gbt.min_samples_leaf = g["min_samples_leaf"].get<int>();
    }
    if (g.contains("base_score")) d.gbt.base_score = g["base_score"].get<double>();
    if (g.contains("early_stopping_rounds")) {
      d.gbt.early_stopping_rounds = g["early_stopping_rounds"].get<int>();
    }
  }
  if (j.contains("gbt_grid")) d.gbt_grid = j["gbt_grid"].get<bool>();
  if (j.contains("gbt_grid_eta")) {
    d.gbt_grid_eta = j["gbt_grid_eta"].get<std::vector<double>>();
  }
  if (j.contains("gbt_grid_depth")) {
    d.gbt_grid_depth = j["gbt_grid_depth"].get<std::vector<int>>();
  }
  return d;
}

std::vector<ExperimentConfig> enumerate_experiments(
    const std::vector<DatasetView>& views, bool include_baseline,
    std::uint64_t master_seed) {
  std::set<std::string> seen;
  for (const auto& v : views) {
    if (!seen.insert(v.view_id).second) {
      throw DataError("duplicate view id " + v.view_id);
    }
  }
  std::vector<Featurizer> featurizers;
  if (include_baseline) featurizers.push_back(Featurizer::None);
  featurizers.push_back(Featurizer::Tfidf);
  featurizers.push_back(Featurizer::W2v);

  std::vector<ExperimentConfig> configs;
  for (const auto& view : views) {
    for (const Featurizer f : featurizers) {
      for (const ModelKind m :
           {ModelKind::RandomForest, ModelKind::AdaBoost, ModelKind::Gbt}) {
        ExperimentConfig c;
        c.view_id = view.view_id;
        c.featurizer = f;
        c.model = m;
        c.master_seed = master_seed;
        c.config_seed = stable_config_seed(master_seed, view.view_id, f, m);
        c.skipped = !view.trainable;
        c.skip_reason = view.skip_reason;
        configs.push_back(std::move(c));
      }
    }
  }
  return configs;
}

namespace {

struct StageClock {
  json& timings;
  std::string stage;
  std::chrono::steady_clock::time_point start;

  StageClock(json& t, std::string s)
      : timings(t), stage(std::move(s)), start(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    timings[stage] =
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
  }
};

std::string fingerprint_hex(const FeatureMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& id : m.row_ids) h = fnv1a64(id, h);
  for (const int y : m.labels) h = fnv1a64(std::to_string(y), h);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::vector<std::string>> tokenize_all(
    const std::vector<std::string>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(tokenize(d));
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const DataBundle& data,
                         const PipelineDefaults& defaults, int n_threads) {
  RunResult result;
  result.config = config;
  json& manifest = result.manifest;
  json timings = json::object();
  const auto t_total = std::chrono::steady_clock::now();

  const DatasetView* view = nullptr;
  for (const auto& v : data.views) {
    if (v.view_id == config.view_id) {
      view = &v;
      break;
    }
  }
  if (view == nullptr) throw DataError("unknown view " + config.view_id);
  if (!view->trainable) {
    throw DataError("view " + config.view_id +
                    " is not trainable: " + view->skip_reason);
  }

  const std::string stage_prefix = "config " + config.id() + " stage ";
  int stage_idx = 0;
  auto guard = [&](auto&& fn) {
    const char* stage = kStageOrder[stage_idx];
    StageClock clock(timings, stage);
    try {
      fn();
    } catch (const std::exception& e) {
      throw DataError(stage_prefix + stage + ": " + e.what());
    }
    ++stage_idx;
  };

  const SchemaConfig schema = augment_schema_for_join(data.schema);

  FeatureMatrix frame;
  std::vector<std::string> narratives;
  guard([&] {
    frame = build_frame(data.records, view->record_ids, schema);
    narratives = gather_narratives(data.records, view->record_ids);
    manifest["dataset"]["view_records"] = frame.rows();
    manifest["dataset"]["class_counts"] = frame.class_counts();
    manifest["dataset"]["fingerprint"] = fingerprint_hex(frame);
  });

  CleanReport clean_report;
  FeatureMatrix cleaned;
  guard([&] {
    cleaned = clean_features(frame, defaults.drop_threshold, &clean_report);
    manifest["dataset"]["dropped_columns"] = clean_report.dropped_columns;
  });

  FeatureMatrix encoded;
  std::size_t unseen = 0;
  guard([&] {
    encoded = encode_categoricals(cleaned, &unseen);
    manifest["dataset"]["encoded_features"] = encoded.cols();
  });

  SplitBundle split;
  guard([&] {
    split = stratified_split(encoded, defaults.split_proportions,
                             derive_seed(config.config_seed, "split"));
    manifest["dataset"]["train_rows"] = split.train.rows();
    manifest["dataset"]["validation_rows"] = split.validation.rows();
    manifest["dataset"]["test_rows"] = split.test.rows();
  });

  // Narrative text vectors per partition, empty for the baseline featurizer.
  std::vector<std::vector<double>> text_train, text_valid, text_test;
  std::vector<std::string> text_names;
  guard([&] {
    if (config.featurizer == Featurizer::None) return;
    auto part_tokens = [&](const std::vector<std::size_t>& rows) {
      std::vector<std::string> docs;
      docs.reserve(rows.size());
      for (const std::size_t r : rows) docs.push_back(narratives[r]);
      return tokenize_all(docs);
    };
    const auto train_tokens = part_tokens(split.train_rows);
    const auto valid_tokens = part_tokens(split.validation_rows);
    const auto test_tokens = part_tokens(split.test_rows);

    std::size_t empty_docs = 0;
    if (config.featurizer == Featurizer::Tfidf) {
      const TfidfModel tfidf = tfidf_fit(train_tokens, defaults.tfidf_max_vocab);
      text_train = tfidf_transform_corpus(tfidf, train_tokens, n_threads, &empty_docs);
      text_valid = tfidf_transform_corpus(tfidf, valid_tokens, n_threads, &empty_docs);
      text_test = tfidf_transform_corpus(tfidf, test_tokens, n_threads, &empty_docs);
      text_names = tfidf.vocab;
      manifest["featurizer"]["vocab_size"] = tfidf.vocab.size();
    } else {
      W2vParams w2v = defaults.w2v;
      w2v.seed = derive_seed(config.config_seed, "w2v");
      const EmbeddingModel emb = w2v_train(train_tokens, w2v);
      text_train = embed_corpus(emb, train_tokens, n_threads, &empty_docs);
      text_valid = embed_corpus(emb, valid_tokens, n_threads, &empty_docs);
      text_test = embed_corpus(emb, test_tokens, n_threads, &empty_docs);
      for (int c = 0; c < emb.dim(); ++c) {
        text_names.push_back("w2v_" + std::to_string(c));
      }
      manifest["featurizer"]["vocab_size"] = emb.vocab.size();
      manifest["featurizer"]["final_epoch_loss"] = emb.epoch_losses.back();
    }
    manifest["featurizer"]["docs_without_features"] = empty_docs;
  });

  FeatureMatrix sel_train = split.train;
  FeatureMatrix sel_valid = split.validation;
  FeatureMatrix sel_test = split.test;
  guard([&] {
    if (static_cast<int>(split.train.cols()) <= defaults.top_k_features) {
      manifest["selection"]["kept_all"] = true;
      return;
    }
    SmoteParams sel_smote = defaults.smote;
    sel_smote.seed = derive_seed(config.config_seed, "sel_smote");
    const SmoteResult balanced = smote_resample(split.train, sel_smote);
    RandomForestParams imp_params;
    imp_params.n_trees = defaults.importance_trees;
    const ForestModel imp_forest =
        fit_random_forest(balanced.data, imp_params,
                          derive_seed(config.config_seed, "importance"), n_threads);
    const ImportanceVector imp = mdi_importances(imp_forest, true);
    std::vector<std::size_t> top =
        select_top_k_indices(imp, defaults.top_k_features);
    std::sort(top.begin(), top.end());  // keep original column order
    sel_train = split.train.select_columns(top);
    sel_valid = split.validation.select_columns(top);
    sel_test = split.test.select_columns(top);
    manifest["selection"]["kept_all"] = false;
    manifest["selection"]["selected_features"] = sel_train.feature_names();
  });
  manifest["selection"]["structured_features"] = sel_train.cols();

  FeatureMatrix fused_train, fused_valid, fused_test;
  guard([&] {
    if (config.featurizer == Featurizer::None) {
      fused_train = std::move(sel_train);
      fused_valid = std::move(sel_valid);
      fused_test = std::move(sel_test);
    } else {
      fused_train = fuse_features(sel_train, text_train, text_names);
      fused_valid = fuse_features(sel_valid, text_valid, text_names);
      fused_test = fuse_features(sel_test, text_test, text_names);
    }
    manifest["dataset"]["fused_features"] = fused_train.cols();
  });

  FeatureMatrix train;
  guard([&] {
    SmoteParams smote = defaults.smote;
    smote.seed = derive_seed(config.config_seed, "smote");
    SmoteResult balanced = smote_resample(fused_train, smote);
    manifest["dataset"]["smote_added"] =
        balanced.data.rows() - balanced.n_original;
    train = std::move(balanced.data);
  });

  ForestModel forest;
  AdaBoostModel ada;
  GbtModel gbt;
  guard([&] {
    const std::uint64_t model_seed = derive_seed(config.config_seed, "model");
    json& mj = manifest["model"];
    mj["algorithm"] = model_name(config.model);
    switch (config.model) {
      case ModelKind::RandomForest: {
        forest = fit_random_forest(train, defaults.forest, model_seed, n_threads);
        mj["n_trees"] = forest.trees.size();
        break;
      }
      case ModelKind::AdaBoost: {
        ada = fit_adaboost(train, defaults.adaboost, model_seed);
        mj["n_stages"] = ada.stages.size();
        break;
      }
      case ModelKind::Gbt: {
        if (!defaults.gbt_grid) {
          gbt = fit_gbt(train, defaults.gbt, model_seed, &fused_valid, n_threads);
        } else {
          double best_f1 = -1.0;
          GbtParams best_params = defaults.gbt;
          for (const double eta : defaults.gbt_grid_eta) {
            for (const int depth : defaults.gbt_grid_depth) {
              GbtParams p = defaults.gbt;
              p.eta = eta;
              p.max_depth = depth;
              GbtModel candidate =
                  fit_gbt(train, p, model_seed, &fused_valid, n_threads);
              const auto preds = predict(candidate, fused_valid, n_threads);
              const double f1 =
                  evaluate(fused_valid.labels, preds).macro_f1;
              if (f1 > best_f1) {
                best_f1 = f1;
                best_params = p;
                gbt = std::move(candidate);
              }
            }
          }
          mj["grid"] = {{"eta", best_params.eta},
                        {"max_depth", best_params.max_depth},
                        {"validation_macro_f1", best_f1}};
        }
        mj["rounds_used"] = gbt.used_rounds();
        break;
      }
    }
  });

  guard([&] {
    std::vector<int> y_pred;
    switch (config.model) {
      case ModelKind::RandomForest:
        y_pred = predict(forest, fused_test, n_threads);
        break;
      case ModelKind::AdaBoost:
        y_pred = predict(ada, fused_test, n_threads);
        break;
      case ModelKind::Gbt:
        y_pred = predict(gbt, fused_test, n_threads);
        break;
    }
    result.report = evaluate(fused_test.labels, y_pred);
    result.report.config_id = config.id();
    result.test_ids = fused_test.row_ids;
    result.y_true = fused_test.labels;
    result.y_pred = std::move(y_pred);
  });

  manifest["config"] = {{"view_id", config.view_id},
                        {"featurizer", featurizer_name(config.featurizer)},
                        {"model", model_name(config.model)},
                        {"master_seed", config.master_seed},
                        {"config_seed", config.config_seed}};
  manifest["defaults"] = defaults.to_json();
  manifest["stage_order"] = json::array();
  for (const char* stage : kStageOrder) manifest["stage_order"].push_back(stage);
  manifest["sub_seeds"] = {
      {"split", derive_seed(config.config_seed, "split")},
      {"sel_smote", derive_seed(config.config_seed, "sel_smote")},
      {"importance", derive_seed(config.config_seed, "importance")},
      {"w2v", derive_seed(config.config_seed, "w2v")},
      {"smote", derive_seed(config.config_seed, "smote")},
      {"model", derive_seed(config.config_seed, "model")}};
  manifest["diagnostics"]["unseen_categories"] = unseen;
  manifest["diagnostics"]["zero_predicted_classes"] =
      result.report.zero_predicted_classes;
  const auto total_elapsed = std::chrono::steady_clock::now() - t_total;
  timings["total"] =
      std::chrono::duration_cast<std::chrono::duration<double>>(total_elapsed)
          .count();
  manifest["timings"] = std::move(timings);
  result.ok = true;
  return result;
}

std::vector<RunResult> run_matrix(const std::vector<ExperimentConfig>& configs,
                                  const DataBundle& data,
                                  const PipelineDefaults& defaults, int jobs,
                                  bool progress) {
  std::vector<RunResult> results(configs.size());
  const std::int64_t n = static_cast<std::int64_t>(configs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const ExperimentConfig& config = configs[i];
    RunResult& result = results[i];
    if (config.skipped) {
      result.config = config;
      result.error = "skipped: " + config.skip_reason;
    } else {
      try {
        result = run_experiment(config, data, defaults, 1);
      } catch (const std::exception& e) {
        result.config = config;
        result.ok = false;
        result.error = e.what();
      }
    }
    if (progress) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        std::fprintf(stderr, "[%lld/%lld] %s %s\n",
                     static_cast<long long>(i + 1), static_cast<long long>(n),
                     config.id().c_str(),
                     config.skipped ? "skipped"
                                    : (result.ok ? "ok" : "failed"));
      }
    }
  }
  return results;
}

json manifest_reproducible_part(const json& manifest) {
  json copy = manifest;
  copy.erase("timings");
  return copy;
}

std::vector<RankTable> compute_rankings(const std::vector<RunResult>& results,
                                        const std::vector<DatasetView>& views) {
  std::vector<RankTable> tables;
  for (const Featurizer f :
       {Featurizer::None, Featurizer::Tfidf, Featurizer::W2v}) {
    bool any = false;
    std::map<RoadClass, std::vector<ViewScore>> candidates;
    for (int rc_idx = 0; rc_idx < kNumRoadClasses; ++rc_idx) {
      const auto rc = static_cast<RoadClass>(rc_idx);
      std::vector<ViewScore> scores;
      for (const auto& view : views) {
        if (!view.members.count(rc)) continue;
        double best = -1.0;
        for (const auto& r : results) {
          if (!r.ok || r.config.featurizer != f ||
              r.config.view_id != view.view_id) {
            continue;
          }
          best = std::max(best, r.report.macro_f1);
        }
        if (best < 0.0) continue;  // view never ran under this featurizer
        any = true;
        scores.push_back(ViewScore{view.name, view.scheme, best});
      }
      if (!scores.empty()) candidates[rc] = std::move(scores);
    }
    if (!any) continue;
    RankTable table;
    table.featurizer = f;
    table.ranked = rank_views(candidates);
    tables.push_back(std::move(table));
  }
  return tables;
}

namespace {

int model_precedence(ModelKind m) {
  switch (m) {
    case ModelKind::Gbt: return 2;
    case ModelKind::RandomForest: return 1;
    case ModelKind::AdaBoost: return 0;
  }
  return -1;
}

int featurizer_precedence(Featurizer f) {
  switch (f) {
    case Featurizer::Tfidf: return 2;
    case Featurizer::W2v: return 1;
    case Featurizer::None: return 0;
  }
  return -1;
}

bool beats(const RunResult& a, const RunResult& b) {
  if (a.report.macro_f1 != b.report.macro_f1) {
    return a.report.macro_f1 > b.report.macro_f1;
  }
  if (model_precedence(a.config.model) != model_precedence(b.config.model)) {
    return model_precedence(a.config.model) > model_precedence(b.config.model);
  }
  return featurizer_precedence(a.config.featurizer) >
         featurizer_precedence(b.config.featurizer);
}

}  // namespace

std::vector<const RunResult*> best_per_view(
    const std::vector<RunResult>& results) {
  std::vector<std::string> order;
  std::map<std::string, const RunResult*> best;
  for (const auto& r : results) {
    if (!r.ok) continue;
    auto it = best.find(r.config.view_id);
    if (it == best.end()) {
      order.push_back(r.config.view_id);
      best[r.config.view_id] = &r;
    } else if (beats(r, *it->second)) {
      it->second = &r;
    }
  }
  std::vector<const RunResult*> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(best[id]);
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string results_csv(const std::vector<RunResult>& results) {
  std::string out =
      "view_id,featurizer,model,master_seed,config_seed,ok,error,config_id,"
      "macro_precision,macro_recall,macro_f1,weighted_precision,"
      "weighted_recall,weighted_f1,accuracy,total,zero_predicted_classes";
  for (int c = 0; c < kNumClasses; ++c) {
    const std::string tag = "class" + std::to_string(c);
    out += "," + tag + "_precision," + tag + "_recall," + tag + "_f1," + tag +
           "_support";
  }
  for (int t = 0; t < kNumClasses; ++t) {
    for (int p = 0; p < kNumClasses; ++p) {
      out += ",confusion_" + std::to_string(t) + "_" + std::to_string(p);
    }
  }
  out += "\n";
  for (const auto& r : results) {
    out += csv_field(r.config.view_id);
    out += ",";
    out += featurizer_name(r.config.featurizer);
    out += ",";
    out += model_name(r.config.model);
    out += "," + std::to_string(r.config.master_seed);
    out += "," + std::to_string(r.config.config_seed);
    out += ",";
    out += r.ok ? "1" : "0";
    out += "," + csv_field(r.error);
    out += "," + csv_field(r.report.config_id);
    out += "," + fmt(r.report.macro_precision);
    out += "," + fmt(r.report.macro_recall);
    out += "," + fmt(r.report.macro_f1);
    out += "," + fmt(r.report.weighted_precision);
    out += "," + fmt(r.report.weighted_recall);
    out += "," + fmt(r.report.weighted_f1);
    out += "," + fmt(r.report.accuracy);
    out += "," + std::to_string(r.report.total);
    out += "," + std::to_string(r.report.zero_predicted_classes);
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& m = r.report.per_class[c];
      out += "," + fmt(m.precision) + "," + fmt(m.recall) + "," + fmt(m.f1) +
             "," + std::to_string(m.support);
    }
    for (int t = 0; t < kNumClasses; ++t) {
      for (int p = 0; p < kNumClasses; ++p) {
        out += "," + std::to_string(r.report.confusion.counts[t][p]);
      }
    }
    out += "\n";
  }
  return out;
}

json results_json(const std::vector<RunResult>& results,
                  const std::vector<RankTable>& rankings) {
  json j;
  j["results"] = json::array();
  for (const auto& r : results) {
    json entry = {{"view_id", r.config.view_id},
                  {"featurizer", featurizer_name(r.config.featurizer)},
                  {"model", model_name(r.config.model)},
                  {"master_seed", r.config.master_seed},
                  {"config_seed", r.config.config_seed},
                  {"ok", r.ok},
                  {"error", r.error}};
    if (r.ok) entry["report"] = r.report.to_json();
    j["results"].push_back(std::move(entry));
  }
  j["rankings"] = json::array();
  for (const auto& table : rankings) {
    json t = {{"featurizer", featurizer_name(table.featurizer)},
              {"by_road_class", json::object()}};
    for (const auto& [rc, scores] : table.ranked) {
      json list = json::array();
      for (const auto& s : scores) {
        list.push_back({{"view", s.view_name},
                        {"scheme", static_cast<int>(s.scheme)},
                        {"macro_f1", s.macro_f1}});
      }
      t["by_road_class"][road_class_name(rc)] = std::move(list);
    }
    j["rankings"].push_back(std::move(t));
  }
  const auto best = best_per_view(results);
  j["best_per_view"] = json::array();
  for (const RunResult* r : best) {
    j["best_per_view"].push_back({{"view_id", r->config.view_id},
                                  {"featurizer",
                                   featurizer_name(r->config.featurizer)},
                                  {"model", model_name(r->config.model)},
                                  {"macro_f1", r->report.macro_f1}});
  }
  return j;
}

std::string results_markdown(const std::vector<RunResult>& results,
                             const std::vector<RankTable>& rankings) {
  std::string out = "# Experiment matrix results\n\n";
  char buf[64];
  auto f3 = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };

  out += "## Best model per view\n\n";
  for (const RunResult* r : best_per_view(results)) {
    out += "### " + r->config.view_id + " (" +
           model_name(r->config.model) + ", " +
           featurizer_name(r->config.featurizer) + ")\n\n";
    out += "```\n" + r->report.to_table() + "```\n\n";
  }

  for (const auto& table : rankings) {
    out += std::string("## View rankings by road class (") +
           featurizer_name(table.featurizer) + ")\n\n";
    for (const auto& [rc, scores] : table.ranked) {
      out += std::string("### ") + road_class_name(rc) + "\n\n";
      out += "| Rank | View | Scheme | Macro F1 |\n";
      out += "| --- | --- | --- | --- |\n";
      for (std::size_t i = 0; i < scores.size(); ++i) {
        out += "| " + std::to_string(i + 1) + " | " + scores[i].view_name +
               " | Group " + std::to_string(static_cast<int>(scores[i].scheme)) +
               " | " + f3(scores[i].macro_f1) + " |\n";
      }
      out += "\n";
    }
  }

  std::vector<const RunResult*> skipped_or_failed;
  for (const auto& r : results) {
    if (!r.ok) skipped_or_failed.push_back(&r);
  }
  if (!skipped_or_failed.empty()) {
    out += "## Skipped and failed configurations\n\n";
    for (const RunResult* r : skipped_or_failed) {
      out += "- `" + r->config.id() + "`: " + r->error + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string emit_report(const std::vector<RunResult>& results,
                        const std::vector<RankTable>& rankings,
                        ReportFormat format) {
  if (results.empty()) throw DataError("no results to report");
  switch (format) {
    case ReportFormat::Csv: return results_csv(results);
    case ReportFormat::Json: return results_json(results, rankings).dump(2) + "\n";
    case ReportFormat::Markdown: return results_markdown(results, rankings);
  }
  throw DataError("unknown report format");
}

std::vector<RunResult> parse_results_csv(const std::string& text) {
  const CsvTable table = parse_csv_text(text);
  auto col = [&](const std::string& name) {
    const int idx = table.find_col(name);
    if (idx < 0) throw DataError("results CSV is missing column " + name);
    return idx;
  };
  const int c_view = col("view_id");
  const int c_feat = col("featurizer");
  const int c_model = col("model");
  const int c_mseed = col("master_seed");
  const int c_cseed = col("config_seed");
  const int c_ok = col("ok");
  const int c_error = col("error");
  const int c_id = col("config_id");
  const int c_macro_p = col("macro_precision");
  const int c_macro_r = col("macro_recall");
  const int c_macro_f = col("macro_f1");
  const int c_w_p = col("weighted_precision");
  const int c_w_r = col("weighted_recall");
  const int c_w_f = col("weighted_f1");
  const int c_acc = col("accuracy");
  const int c_total = col("total");
  const int c_zero = col("zero_predicted_classes");

  std::vector<RunResult> results;
  for (const auto& row : table.rows) {
    RunResult r;
    r.config.view_id = row[c_view];
    const auto f = featurizer_from_name(row[c_feat]);
    const auto m = model_from_name(row[c_model]);
    if (!f || !m) throw DataError("bad featurizer or model in results CSV");
    r.config.featurizer = *f;
    r.config.model = *m;
    r.config.master_seed = std::stoull(row[c_mseed]);
    r.config.config_seed = std::stoull(row[c_cseed]);
    r.ok = row[c_ok] == "1";
    r.error = row[c_error];
    r.report.config_id = row[c_id];
    r.report.macro_precision = std::stod(row[c_macro_p]);
    r.report.macro_recall = std::stod(row[c_macro_r]);
    r.report.macro_f1 = std::stod(row[c_macro_f]);
    r.report.weighted_precision = std::stod(row[c_w_p]);
    r.report.weighted_recall = std::stod(row[c_w_r]);
    r.report.weighted_f1 = std::stod(row[c_w_f]);
    r.report.accuracy = std::stod(row[c_acc]);
    r.report.total = std::stoll(row[c_total]);
    r.report.zero_predicted_classes = std::stoi(row[c_zero]);
    for (int c = 0; c < kNumClasses; ++c) {
      const std::string tag = "class" + std::to_string(c);
      auto& mtr = r.report.per_class[c];
      mtr.precision = std::stod(row[col(tag + "_precision")]);
      mtr.recall = std::stod(row[col(tag + "_recall")]);
      mtr.f1 = std::stod(row[col(tag + "_f1")]);
      mtr.support = std::stoll(row[col(tag + "_support")]);
    }
    for (int t = 0; t < kNumClasses; ++t) {
      for (int p = 0; p < kNumClasses; ++p) {
        r.report.confusion.counts[t][p] = std::stoll(row[col(
            "confusion_" + std::to_string(t) + "_" + std::to_string(p))]);
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace crashsev
