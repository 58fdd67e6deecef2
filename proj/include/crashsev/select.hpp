#pragma once

// Impurity-based feature importance and top-k selection for structured
// features.

#include <span>
#include <string>
#include <vector>

#include "crashsev/forest.hpp"

namespace crashsev {

// Gini impurity 1 - sum(p_k^2) of a proportion vector (must sum to 1).
double gini_impurity(std::span<const double> proportions);

struct ImportanceVector {
  std::vector<double> scores;
  std::vector<std::string> names;
  bool normalized = false;
};

// Mean decrease in impurity: per feature, the sum over splits of
// (node weight fraction) x (impurity decrease), averaged over trees.
// normalized=true rescales the scores to sum to 1.
ImportanceVector mdi_importances(const ForestModel& forest,
                                 bool normalized = true);

// Indices of the k highest-scoring features, score-descending with ties to
// the smaller original index. k >= feature count returns everything.
std::vector<std::size_t> select_top_k_indices(const ImportanceVector& imp,
                                              int k = 100);
std::vector<std::string> select_top_k(const ImportanceVector& imp, int k = 100);

void save_importances_csv(const std::string& path, const ImportanceVector& imp);

}  // namespace crashsev
