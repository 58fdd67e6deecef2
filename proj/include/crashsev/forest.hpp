#pragma once

// Random forest: bootstrap-sampled trees over random feature subsets,
// majority vote with ties to the smaller class code. Tree training is
// OpenMP-parallel; each tree owns an RNG stream derived from (seed, tree
// index), so any thread count yields the same forest.

#include <cstdint>
#include <string>
#include <vector>

#include "crashsev/matrix.hpp"
#include "crashsev/tree.hpp"

namespace crashsev {

struct RandomForestParams {
  int n_trees = 300;
  int features_per_split = -1;  // -1 = floor(sqrt(n_features))
  bool bootstrap = true;
  int max_depth = -1;
  int min_samples_leaf = 1;
};

struct ForestModel {
  RandomForestParams params;
  std::uint64_t seed = 0;
  int n_classes = kNumClasses;
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;
};

// Imputed values only: the missing mask is ignored by design.
ForestModel fit_random_forest(const FeatureMatrix& X,
                              const RandomForestParams& params,
                              std::uint64_t seed, int n_threads = 1);

// Vote shares per class; rows sum to 1.
std::vector<double> predict_proba(const ForestModel& model,
                                  const FeatureMatrix& X, int n_threads = 1);
std::vector<int> predict(const ForestModel& model, const FeatureMatrix& X,
                         int n_threads = 1);

}  // namespace crashsev
