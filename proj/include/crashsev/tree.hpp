#pragma once

// CART-style decision tree with exact sorted-scan split search on the Gini
// criterion, weighted samples, and native missing-value routing (each split
// learns which direction masked values take).

#include <cstdint>
#include <span>
#include <vector>

#include "crashsev/matrix.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool missing_left = true;
  int left = -1;
  int right = -1;
  // Classification leaves carry the weighted class histogram; boosting trees
  // carry a scalar score in value.
  std::vector<double> histogram;
  double value = 0.0;
  double weight = 0.0;    // total sample weight reaching the node
  double impurity = 0.0;  // Gini at the node (classification trees)
  double split_gain = 0.0;  // impurity decrease (or boosting gain) of the split
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // preorder; nodes[0] is the root
  int n_classes = kNumClasses;

  bool empty() const { return nodes.empty(); }
};

struct TreeParams {
  int max_depth = -1;          // -1 = unbounded
  int min_samples_leaf = 1;    // occurrence count, not weight
  int features_per_split = -1; // -1 = all features
  bool respect_missing = true; // false: treat every value as present
  double min_gain = 1e-12;
};

// rows may carry duplicates (bootstrap multisets). weights align with matrix
// rows; empty means unit weight. feature_rng drives per-node feature
// subsampling and may be null when features_per_split covers everything.
DecisionTree fit_tree(const FeatureMatrix& X, std::span<const std::size_t> rows,
                      std::span<const double> weights, const TreeParams& params,
                      Rng* feature_rng);
DecisionTree fit_tree(const FeatureMatrix& X, const TreeParams& params,
                      Rng* feature_rng = nullptr);

// Index of the leaf a row lands in.
int tree_leaf(const DecisionTree& tree, const FeatureMatrix& X, std::size_t row,
              bool respect_missing);
// Majority class at the leaf, ties to the smaller class code.
int tree_predict(const DecisionTree& tree, const FeatureMatrix& X,
                 std::size_t row, bool respect_missing);

int argmax_smallest(std::span<const double> scores);

}  // namespace crashsev
