#pragma once

// Regularized gradient-boosted trees for multiclass softmax: one tree per
// class per round on second-order gradients, L1/L2-regularized leaf weights
// w* = -soft_threshold(G, alpha_l1) / (H + lambda_l2), grow-then-prune with a
// minimum split gain, and native missing-value default directions. Optional
// early stopping on validation log-loss.

#include <cstdint>
#include <string>
#include <vector>

#include "crashsev/matrix.hpp"
#include "crashsev/tree.hpp"

namespace crashsev {

struct GbtParams {
  int n_rounds = 300;
  double eta = 0.1;
  double lambda_l2 = 1.0;
  double alpha_l1 = 0.0;
  double gamma_min_gain = 0.0;
  int max_depth = 6;
  int min_samples_leaf = 1;
  double base_score = 0.0;
  // 0 disables early stopping; otherwise stop after this many rounds without
  // validation log-loss improvement and keep the best round.
  int early_stopping_rounds = 20;
};

struct GbtModel {
  GbtParams params;
  int n_classes = kNumClasses;
  std::vector<std::string> feature_names;
  // rounds[r][c]: the round-r tree for class c. Leaf values are unscaled w*;
  // eta is applied when scores accumulate.
  std::vector<std::vector<DecisionTree>> rounds;
  std::vector<double> train_logloss;  // after each round's update
  std::vector<double> valid_logloss;
  int best_round = -1;  // last round used for prediction

  int used_rounds() const { return best_round + 1; }
};

GbtModel fit_gbt(const FeatureMatrix& train, const GbtParams& params,
                 std::uint64_t seed, const FeatureMatrix* validation = nullptr,
                 int n_threads = 1);

// Softmax over accumulated scores; rows sum to 1.
std::vector<double> predict_proba(const GbtModel& model, const FeatureMatrix& X,
                                  int n_threads = 1);
std::vector<int> predict(const GbtModel& model, const FeatureMatrix& X,
                         int n_threads = 1);

double soft_threshold(double g, double alpha);

}  // namespace crashsev
