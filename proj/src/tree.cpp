#include "crashsev/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>

#include "crashsev/error.hpp"

namespace crashsev {

int argmax_smallest(std::span<const double> scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  return best;
}

namespace {

using Hist = std::array<double, kNumClasses>;

double gini(const Hist& hist, double weight) {
  if (weight <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (const double h : hist) {
    const double p = h / weight;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct Builder {
  const FeatureMatrix& X;
  std::span<const double> weights;  // empty = unit
  const TreeParams& params;
  Rng* rng;
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, std::size_t>> present;  // scan scratch

  double weight_of(std::size_t row) const {
    return weights.empty() ? 1.0 : weights[row];
  }

  std::vector<int> sample_features() const {
    const int d = static_cast<int>(X.cols());
    const int k = params.features_per_split;
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (k <= 0 || k >= d || rng == nullptr) return all;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng->uniform_int(d - i));
      std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  // Appends the subtree for rows (a multiset) and returns its root index.
  int build(std::vector<std::size_t>&& rows, int depth) {
    Hist hist{};
    double weight = 0.0;
    for (const std::size_t r : rows) {
      hist[X.labels[r]] += weight_of(r);
      weight += weight_of(r);
    }
    TreeNode node;
    node.histogram.assign(hist.begin(), hist.end());
    node.weight = weight;
    node.impurity = gini(hist, weight);
    node.value = argmax_smallest(node.histogram);

    bool pure = true;
    for (const std::size_t r : rows) {
      if (X.labels[r] != X.labels[rows[0]]) {
        pure = false;
        break;
      }
    }
    const bool depth_ok = params.max_depth < 0 || depth < params.max_depth;
    if (pure || !depth_ok ||
        rows.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
      const int idx = static_cast<int>(nodes.size());
      nodes.push_back(std::move(node));
      return idx;
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    bool best_missing_left = true;
    double best_gain = 0.0;

    for (const int f : sample_features()) {
      present.clear();
      Hist miss_hist{};
      double miss_weight = 0.0;
      std::size_t miss_count = 0;
      for (const std::size_t r : rows) {
        if (params.respect_missing && X.is_missing(r, f)) {
          miss_hist[X.labels[r]] += weight_of(r);
          miss_weight += weight_of(r);
          ++miss_count;
        } else {
          present.emplace_back(X.at(r, f), r);
        }
      }
      if (present.size() < 2) continue;
      std::stable_sort(present.begin(), present.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });

      Hist left_hist{};
      double left_weight = 0.0;
      for (std::size_t i = 1; i < present.size(); ++i) {
        const auto& [v_prev, r_prev] = present[i - 1];
        left_hist[X.labels[r_prev]] += weight_of(r_prev);
        left_weight += weight_of(r_prev);
        const double v_cur = present[i].first;
        if (v_cur == v_prev) continue;
        double thr = 0.5 * (v_prev + v_cur);
        // Floating-point midpoints can collapse onto the lower value for
        // adjacent representable numbers; fall back to the upper value so
        // the rule value < threshold still separates the pair.
        if (!(v_prev < thr)) thr = v_cur;

        const std::size_t left_count = i;
        const std::size_t right_count = present.size() - i;
        for (const bool miss_left : {true, false}) {
          if (!miss_left && miss_count == 0) break;
          const std::size_t lc = left_count + (miss_left ? miss_count : 0);
          const std::size_t rc = right_count + (miss_left ? 0 : miss_count);
          if (lc < static_cast<std::size_t>(params.min_samples_leaf) ||
              rc < static_cast<std::size_t>(params.min_samples_leaf)) {
            continue;
          }
          double lw = left_weight;
          Hist lh = left_hist;
          if (miss_left) {
            lw += miss_weight;
            for (int c = 0; c < kNumClasses; ++c) lh[c] += miss_hist[c];
          }
          const double rw = weight - lw;
          Hist rh;
          for (int c = 0; c < kNumClasses; ++c) rh[c] = hist[c] - lh[c];
          const double gain = node.impurity -
                              (lw / weight) * gini(lh, lw) -
                              (rw / weight) * gini(rh, rw);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            best_threshold = thr;
            best_missing_left = miss_left;
          }
        }
      }
    }

    if (best_feature < 0 || best_gain <= params.min_gain) {
      const int idx = static_cast<int>(nodes.size());
      nodes.push_back(std::move(node));
      return idx;
    }

    node.feature = best_feature;
    node.threshold = best_threshold;
    node.missing_left = best_missing_left;
    node.split_gain = best_gain;
    std::vector<std::size_t> left_rows, right_rows;
    for (const std::size_t r : rows) {
      bool go_left;
      if (params.respect_missing && X.is_missing(r, best_feature)) {
        go_left = best_missing_left;
      } else {
        go_left = X.at(r, best_feature) < best_threshold;
      }
      (go_left ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int idx = static_cast<int>(nodes.size());
    nodes.push_back(std::move(node));
    const int left = build(std::move(left_rows), depth + 1);
    const int right = build(std::move(right_rows), depth + 1);
    nodes[idx].left = left;
    nodes[idx].right = right;
    return idx;
  }
};

}  // namespace

DecisionTree fit_tree(const FeatureMatrix& X, std::span<const std::size_t> rows,
                      std::span<const double> weights, const TreeParams& params,
                      Rng* feature_rng) {
  if (rows.empty()) throw DataError("cannot fit a tree on zero rows");
  if (X.labels.size() != X.rows()) {
    throw DataError("tree fitting needs one label per row");
  }
  double total = 0.0;
  for (const std::size_t r : rows) {
    if (r >= X.rows()) throw DataError("tree row index out of range");
    const double w = weights.empty() ? 1.0 : weights[r];
    if (w < 0.0) throw DataError("negative sample weight");
    total += w;
  }
  if (total <= 0.0) throw DataError("zero total sample weight");

  Builder builder{X, weights, params, feature_rng, {}, {}};
  builder.build(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  tree.n_classes = kNumClasses;
  return tree;
}

DecisionTree fit_tree(const FeatureMatrix& X, const TreeParams& params,
                      Rng* feature_rng) {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(X, rows, {}, params, feature_rng);
}

int tree_leaf(const DecisionTree& tree, const FeatureMatrix& X, std::size_t row,
              bool respect_missing) {
  if (tree.empty()) throw DataError("prediction from an empty tree");
  int idx = 0;
  while (tree.nodes[idx].feature >= 0) {
    const TreeNode& node = tree.nodes[idx];
    bool go_left;
    if (respect_missing && X.is_missing(row, node.feature)) {
      go_left = node.missing_left;
    } else {
      go_left = X.at(row, node.feature) < node.threshold;
    }
    idx = go_left ? node.left : node.right;
  }
  return idx;
}

int tree_predict(const DecisionTree& tree, const FeatureMatrix& X,
                 std::size_t row, bool respect_missing) {
  const int leaf = tree_leaf(tree, X, row, respect_missing);
  return argmax_smallest(tree.nodes[leaf].histogram);
}

}  // namespace crashsev
