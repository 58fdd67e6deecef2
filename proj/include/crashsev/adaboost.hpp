#pragma once

// Multiclass AdaBoost (SAMME): depth-limited weak trees on reweighted
// samples, stage weight alpha_t = ln((1 - err_t) / err_t) + ln(K - 1).
// Boosting stops when a stage's weighted error reaches the multiclass random
// baseline (K-1)/K (stage discarded) or hits zero (stage kept with a large
// capped alpha).

#include <cstdint>
#include <string>
#include <vector>

#include "crashsev/matrix.hpp"
#include "crashsev/tree.hpp"

namespace crashsev {

struct AdaBoostParams {
  int max_stages = 200;
  int weak_max_depth = 2;
};

struct AdaBoostStage {
  DecisionTree tree;
  double alpha = 0.0;
  double error = 0.0;  // weighted training error of the stage
};

struct AdaBoostModel {
  AdaBoostParams params;
  int n_classes = kNumClasses;      // label-space width
  int n_classes_present = 0;        // K used in the SAMME formulas
  std::vector<std::string> feature_names;
  std::vector<AdaBoostStage> stages;
};

double samme_alpha(double error, int n_classes_present);

AdaBoostModel fit_adaboost(const FeatureMatrix& X, const AdaBoostParams& params,
                           std::uint64_t seed);

// Normalized stage-weight shares; an empty model predicts uniformly.
std::vector<double> predict_proba(const AdaBoostModel& model,
                                  const FeatureMatrix& X, int n_threads = 1);
std::vector<int> predict(const AdaBoostModel& model, const FeatureMatrix& X,
                         int n_threads = 1);

}  // namespace crashsev
