#include "crashsev/forest.hpp"

#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

ForestModel fit_random_forest(const FeatureMatrix& X,
                              const RandomForestParams& params,
                              std::uint64_t seed, int n_threads) {
  if (params.n_trees < 1) throw DataError("forest needs at least one tree");
  if (X.rows() == 0) throw DataError("cannot fit a forest on zero rows");

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.feature_names = X.feature_names();
  model.trees.resize(params.n_trees);

  TreeParams tree_params;
  tree_params.max_depth = params.max_depth;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  tree_params.features_per_split =
      params.features_per_split > 0
          ? params.features_per_split
          : static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols()))));
  tree_params.respect_missing = false;

  const std::int64_t n_trees = params.n_trees;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(X.rows());
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_int(X.rows()));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model.trees[t] = fit_tree(X, rows, {}, tree_params, &rng);
  }
  return model;
}

std::vector<double> predict_proba(const ForestModel& model,
                                  const FeatureMatrix& X, int n_threads) {
  if (model.trees.empty()) throw DataError("prediction from an empty forest");
  if (X.cols() != model.feature_names.size()) {
    throw DataError("feature count does not match the trained forest");
  }
  const std::size_t K = model.n_classes;
  std::vector<double> proba(X.rows() * K, 0.0);
  const std::int64_t n = static_cast<std::int64_t>(X.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t r = 0; r < n; ++r) {
    double* out = proba.data() + r * K;
    for (const auto& tree : model.trees) {
      const int vote = tree_predict(tree, X, r, false);
      out[vote] += 1.0;
    }
    for (std::size_t c = 0; c < K; ++c) {
      out[c] /= static_cast<double>(model.trees.size());
    }
  }
  return proba;
}

std::vector<int> predict(const ForestModel& model, const FeatureMatrix& X,
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
