#include "crashsev/select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "crashsev/csv.hpp"
#include "crashsev/error.hpp"

namespace crashsev {

double gini_impurity(std::span<const double> proportions) {
  double sum = 0.0, sum_sq = 0.0;
  for (const double p : proportions) {
    if (p < 0.0) throw DataError("class proportions must be nonnegative");
    sum += p;
    sum_sq += p * p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("class proportions must sum to 1");
  }
  return 1.0 - sum_sq;
}

ImportanceVector mdi_importances(const ForestModel& forest, bool normalized) {
  if (forest.trees.empty()) {
    throw DataError("importances need a trained forest");
  }
  ImportanceVector imp;
  imp.names = forest.feature_names;
  imp.scores.assign(forest.feature_names.size(), 0.0);
  for (const auto& tree : forest.trees) {
    if (tree.empty()) continue;
    const double root_weight = tree.nodes[0].weight;
    if (root_weight <= 0.0) continue;
    for (const auto& node : tree.nodes) {
      if (node.feature < 0) continue;
      imp.scores[node.feature] += (node.weight / root_weight) * node.split_gain;
    }
  }
  for (double& s : imp.scores) s /= static_cast<double>(forest.trees.size());
  if (normalized) {
    const double total = std::accumulate(imp.scores.begin(), imp.scores.end(), 0.0);
    if (total > 0.0) {
      for (double& s : imp.scores) s /= total;
    }
    imp.normalized = true;
  }
  return imp;
}

std::vector<std::size_t> select_top_k_indices(const ImportanceVector& imp,
                                              int k) {
  std::vector<std::size_t> order(imp.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a] > imp.scores[b];
  });
  if (k >= 0 && order.size() > static_cast<std::size_t>(k)) order.resize(k);
  return order;
}

std::vector<std::string> select_top_k(const ImportanceVector& imp, int k) {
  std::vector<std::string> names;
  for (const std::size_t i : select_top_k_indices(imp, k)) {
    names.push_back(imp.names[i]);
  }
  return names;
}

void save_importances_csv(const std::string& path, const ImportanceVector& imp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "feature,importance\n";
  char buf[64];
  for (const std::size_t i : select_top_k_indices(imp, -1)) {
    std::snprintf(buf, sizeof(buf), "%.17g", imp.scores[i]);
    out << csv_field(imp.names[i]) << ',' << buf << '\n';
  }
}

}  // namespace crashsev
