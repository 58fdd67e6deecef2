#include "crashsev/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

double samme_alpha(double error, int n_classes_present) {
  // err = 0 would send the log to infinity; cap it just above zero so the
  // perfect stage dominates without breaking arithmetic downstream.
  const double err = std::max(error, 1e-10);
  return std::log((1.0 - err) / err) +
         std::log(static_cast<double>(n_classes_present - 1));
}

AdaBoostModel fit_adaboost(const FeatureMatrix& X, const AdaBoostParams& params,
                           std::uint64_t seed) {
  (void)seed;  // deterministic weak learner; kept for interface uniformity
  if (X.rows() == 0) throw DataError("cannot boost on zero rows");
  if (X.labels.size() != X.rows()) {
    throw DataError("boosting needs one label per row");
  }
  std::set<int> present(X.labels.begin(), X.labels.end());
  if (present.size() < 2) {
    throw DataError("boosting needs at least two classes present");
  }

  AdaBoostModel model;
  model.params = params;
  model.n_classes_present = static_cast<int>(present.size());
  model.feature_names = X.feature_names();
  const int K = model.n_classes_present;
  const double baseline = static_cast<double>(K - 1) / K;

  const std::size_t n = X.rows();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);

  TreeParams weak;
  weak.max_depth = params.weak_max_depth;
  weak.respect_missing = false;

  for (int stage = 0; stage < params.max_stages; ++stage) {
    DecisionTree tree = fit_tree(X, rows, weights, weak, nullptr);
    double err = 0.0;
    std::vector<std::uint8_t> wrong(n);
    for (std::size_t r = 0; r < n; ++r) {
      wrong[r] = tree_predict(tree, X, r, false) != X.labels[r] ? 1 : 0;
      if (wrong[r]) err += weights[r];
    }
    if (err >= baseline) break;  // no better than random; discard and stop

    const double alpha = samme_alpha(err, K);
    model.stages.push_back(AdaBoostStage{std::move(tree), alpha, err});
    if (err <= 0.0) break;  // perfect stage; nothing left to reweight

    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (wrong[r]) weights[r] *= std::exp(alpha);
      total += weights[r];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw DataError("boosting weights degenerated at stage " +
                      std::to_string(stage));
    }
    for (double& w : weights) w /= total;
  }
  return model;
}

std::vector<double> predict_proba(const AdaBoostModel& model,
                                  const FeatureMatrix& X, int n_threads) {
  if (X.cols() != model.feature_names.size()) {
    throw DataError("feature count does not match the trained model");
  }
  const std::size_t K = model.n_classes;
  std::vector<double> proba(X.rows() * K, 0.0);
  const std::int64_t n = static_cast<std::int64_t>(X.rows());
  double alpha_total = 0.0;
  for (const auto& stage : model.stages) alpha_total += stage.alpha;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t r = 0; r < n; ++r) {
    double* out = proba.data() + r * K;
    if (model.stages.empty() || alpha_total <= 0.0) {
      for (std::size_t c = 0; c < K; ++c) out[c] = 1.0 / K;
      continue;
    }
    for (const auto& stage : model.stages) {
      out[tree_predict(stage.tree, X, r, false)] += stage.alpha;
    }
    for (std::size_t c = 0; c < K; ++c) out[c] /= alpha_total;
  }
  return proba;
}

std::vector<int> predict(const AdaBoostModel& model, const FeatureMatrix& X,
                         int n_threads) {
  const auto proba = predict_proba(model, X, n_threads);
  const std::size_t K = model.n_classes;
  std::vector<int> labels(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    labels[r] = argmax_smallest({proba.data() + r * K, K});
  }
  return labels;
}

}  // namespace crashsev
