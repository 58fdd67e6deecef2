#include <doctest.h>

#include <cmath>
#include <vector>

#include "crashsev/adaboost.hpp"
#include "crashsev/error.hpp"
#include "crashsev/forest.hpp"
#include "crashsev/gbt.hpp"
#include "crashsev/rng.hpp"

using namespace crashsev;

namespace {

// Four well-separated clusters, one per class.
FeatureMatrix cluster_matrix(std::size_t per_class, std::uint64_t seed,
                             int n_classes = kNumClasses) {
  FeatureMatrix m(per_class * n_classes, 2);
  m.columns[0].name = "x";
  m.columns[1].name = "y";
  Rng rng(seed);
  std::size_t r = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    const double cx = (cls % 2) * 10.0;
    const double cy = (cls / 2) * 10.0;
    for (std::size_t i = 0; i < per_class; ++i, ++r) {
      m.at(r, 0) = cx + rng.uniform01();
      m.at(r, 1) = cy + rng.uniform01();
      m.labels.push_back(cls);
      m.row_ids.push_back("r" + std::to_string(r));
    }
  }
  m.partition = Partition::Train;
  return m;
}

double train_accuracy(const std::vector<int>& pred,
                      const std::vector<int>& truth) {
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("forest separates clustered classes and votes sum to one") {
  const auto m = cluster_matrix(30, 11);
  RandomForestParams params;
  params.n_trees = 40;
  const auto model = fit_random_forest(m, params, 7);
  REQUIRE(model.trees.size() == 40);

  const auto proba = predict_proba(model, m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) sum += proba[r * kNumClasses + c];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(train_accuracy(predict(model, m), m.labels) > 0.97);
}

TEST_CASE("forest training is reproducible and thread-count independent") {
  const auto m = cluster_matrix(20, 3);
  RandomForestParams params;
  params.n_trees = 12;
  const auto a = fit_random_forest(m, params, 99, 1);
  const auto b = fit_random_forest(m, params, 99, 4);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
      CHECK(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
    }
  }

  const auto c = fit_random_forest(m, params, 100, 1);
  bool differs = false;
  for (std::size_t t = 0; t < a.trees.size() && !differs; ++t) {
    if (a.trees[t].nodes.size() != c.trees[t].nodes.size()) {
      differs = true;
    } else {
      for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
        if (a.trees[t].nodes[n].threshold != c.trees[t].nodes[n].threshold) {
          differs = true;
          break;
        }
      }
    }
  }
  CHECK(differs);
}

TEST_CASE("prediction rejects a feature-count mismatch") {
  const auto m = cluster_matrix(10, 5);
  RandomForestParams params;
  params.n_trees = 3;
  const auto model = fit_random_forest(m, params, 1);
  FeatureMatrix wrong(2, 3);
  for (int c = 0; c < 3; ++c) wrong.columns[c].name = "w" + std::to_string(c);
  wrong.labels = {0, 0};
  wrong.row_ids = {"a", "b"};
  CHECK_THROWS_AS(predict(model, wrong), DataError);
}

TEST_CASE("stage weight formula matches its closed form") {
  // err 0.25 with two classes: ln(0.75/0.25) = ln 3.
  CHECK(std::abs(samme_alpha(0.25, 2) - 1.0986122886681098) < 1e-12);
  // The multiclass bonus term ln(K-1).
  CHECK(samme_alpha(0.25, 4) ==
        doctest::Approx(std::log(3.0) + std::log(3.0)).epsilon(1e-12));
  // Zero error is capped, not infinite.
  CHECK(std::isfinite(samme_alpha(0.0, 3)));
  CHECK(samme_alpha(0.0, 3) > 20.0);
}

TEST_CASE("boosting stages stay under the multiclass random baseline") {
  const auto m = cluster_matrix(25, 21);
  AdaBoostParams params;
  params.max_stages = 30;
  const auto model = fit_adaboost(m, params, 5);
  REQUIRE(!model.stages.empty());
  CHECK(model.n_classes_present == 4);
  const double baseline = 3.0 / 4.0;
  for (const auto& stage : model.stages) {
    CHECK(stage.error < baseline);
    CHECK(stage.alpha > 0.0);
  }
  CHECK(train_accuracy(predict(model, m), m.labels) > 0.95);

  const auto proba = predict_proba(model, m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) sum += proba[r * kNumClasses + c];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("boosting a single-class input is rejected") {
  FeatureMatrix m(6, 1);
  m.columns[0].name = "x";
  for (int r = 0; r < 6; ++r) {
    m.at(r, 0) = static_cast<double>(r);
    m.labels.push_back(1);
    m.row_ids.push_back(std::to_string(r));
  }
  CHECK_THROWS_AS(fit_adaboost(m, AdaBoostParams{}, 1), DataError);
}

TEST_CASE("gradient boosting drives training loss down monotonically") {
  const auto m = cluster_matrix(25, 31);
  GbtParams params;
  params.n_rounds = 60;
  params.early_stopping_rounds = 0;  // run every round
  params.max_depth = 3;
  const auto model = fit_gbt(m, params, 9);
  REQUIRE(model.train_logloss.size() == 60);
  for (std::size_t i = 1; i < model.train_logloss.size(); ++i) {
    CHECK(model.train_logloss[i] <= model.train_logloss[i - 1] + 1e-12);
  }
  CHECK(model.train_logloss.back() < model.train_logloss.front());
  CHECK(train_accuracy(predict(model, m), m.labels) > 0.97);

  const auto proba = predict_proba(model, m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) sum += proba[r * kNumClasses + c];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("early stopping keeps the best validation round") {
  const auto train = cluster_matrix(25, 41);
  const auto valid = cluster_matrix(8, 42);
  GbtParams params;
  params.n_rounds = 80;
  params.early_stopping_rounds = 5;
  params.max_depth = 3;
  const auto model = fit_gbt(train, params, 3, &valid);
  CHECK(model.best_round >= 0);
  CHECK(model.used_rounds() <= 80);
  REQUIRE(!model.valid_logloss.empty());
  // The kept round is the arg-min of what was evaluated.
  double best = model.valid_logloss[model.best_round];
  for (const double v : model.valid_logloss) CHECK(best <= v + 1e-12);
}

TEST_CASE("soft thresholding shrinks toward zero and clips small gradients") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(2.0, 0.0) == 2.0);
}

TEST_CASE("l1 and l2 regularization shrink leaf magnitudes") {
  const auto m = cluster_matrix(20, 51);
  GbtParams loose;
  loose.n_rounds = 5;
  loose.early_stopping_rounds = 0;
  GbtParams tight = loose;
  tight.lambda_l2 = 50.0;
  const auto model_loose = fit_gbt(m, loose, 7);
  const auto model_tight = fit_gbt(m, tight, 7);
  const auto max_leaf = [](const GbtModel& model) {
    double mx = 0.0;
    for (const auto& round : model.rounds) {
      for (const auto& tree : round) {
        for (const auto& node : tree.nodes) {
          if (node.feature < 0) mx = std::max(mx, std::abs(node.value));
        }
      }
    }
    return mx;
  };
  CHECK(max_leaf(model_tight) < max_leaf(model_loose));
}

TEST_CASE("gradient trees route missing cells by a learned direction") {
  // Feature 0 signal present for most rows; masked cells correlate with the
  // second class, so the learned default direction should capture them.
  FeatureMatrix m(40, 1);
  m.columns[0].name = "x";
  Rng rng(61);
  for (int r = 0; r < 40; ++r) {
    const bool second = r >= 20;
    m.labels.push_back(second ? 1 : 0);
    m.row_ids.push_back(std::to_string(r));
    if (second && r >= 30) {
      m.at(r, 0) = 0.0;
      m.set_missing(r, 0, true);
    } else {
      m.at(r, 0) = (second ? 5.0 : 0.0) + rng.uniform01();
    }
  }
  m.partition = Partition::Train;
  GbtParams params;
  params.n_rounds = 20;
  params.early_stopping_rounds = 0;
  params.max_depth = 2;
  const auto model = fit_gbt(m, params, 5);
  const auto pred = predict(model, m);
  CHECK(train_accuracy(pred, m.labels) == 1.0);
}
