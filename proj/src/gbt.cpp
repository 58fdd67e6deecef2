#include "crashsev/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/error.hpp"

namespace crashsev {

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

namespace {

struct Presort {
  // Per feature: rows with a present value, ascending by value (ties by row
  // index), plus the values themselves for sequential access; masked rows
  // listed separately. Built once per fit and shared by every round.
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint32_t>> missing;
};

Presort build_presort(const FeatureMatrix& X) {
  Presort ps;
  const std::size_t d = X.cols();
  ps.rows.resize(d);
  ps.values.resize(d);
  ps.missing.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& rows = ps.rows[f];
    for (std::uint32_t r = 0; r < X.rows(); ++r) {
      if (X.is_missing(r, f)) {
        ps.missing[f].push_back(r);
      } else {
        rows.push_back(r);
      }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return X.at(a, f) < X.at(b, f);
                     });
    ps.values[f].reserve(rows.size());
    for (const auto r : rows) ps.values[f].push_back(X.at(r, f));
  }
  return ps;
}

double leaf_score(double G, double H, const GbtParams& p) {
  const double denom = H + p.lambda_l2;
  if (denom <= 0.0) return 0.0;
  return -soft_threshold(G, p.alpha_l1) / denom;
}

double gain_score(double G, double H, const GbtParams& p) {
  const double denom = H + p.lambda_l2;
  if (denom <= 0.0) return 0.0;
  const double t = soft_threshold(G, p.alpha_l1);
  return t * t / denom;
}

struct SplitCandidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = true;
  // Left-child aggregates with the missing block already applied.
  double g_left = 0.0;
  double h_left = 0.0;
  std::int64_t n_left = 0;
};

// One regression tree on gradients g/h, grown level-wise to max_depth with a
// single pass over each presorted feature per level, then pruned bottom-up.
DecisionTree fit_gradient_tree(const FeatureMatrix& X, const Presort& ps,
                               const std::vector<double>& g,
                               const std::vector<double>& h,
                               const GbtParams& params, int n_threads,
                               std::vector<int>& node_of) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  DecisionTree tree;
  tree.n_classes = kNumClasses;
  auto& nodes = tree.nodes;
  std::vector<double> g_sum, h_sum;
  std::vector<std::int64_t> count;

  {
    TreeNode root;
    double G = 0.0, H = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      G += g[r];
      H += h[r];
    }
    root.value = leaf_score(G, H, params);
    root.weight = static_cast<double>(n);
    nodes.push_back(std::move(root));
    g_sum.push_back(G);
    h_sum.push_back(H);
    count.push_back(static_cast<std::int64_t>(n));
  }
  std::fill(node_of.begin(), node_of.end(), 0);

  std::size_t lvl_begin = 0, lvl_end = 1;
  for (int depth = 0; depth < params.max_depth && lvl_begin < lvl_end; ++depth) {
    const std::size_t n_active = lvl_end - lvl_begin;
    std::vector<std::uint8_t> splittable(n_active, 0);
    bool any = false;
    for (std::size_t s = 0; s < n_active; ++s) {
      if (count[lvl_begin + s] >= 2 * params.min_samples_leaf &&
          count[lvl_begin + s] >= 2) {
        splittable[s] = 1;
        any = true;
      }
    }
    if (!any) break;

    // Per-feature winners, reduced over features afterwards in index order so
    // the result never depends on thread scheduling.
    std::vector<std::vector<SplitCandidate>> per_feature(d);
    const std::int64_t dd = static_cast<std::int64_t>(d);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(n_threads > 0 ? n_threads : 1)
#endif
    for (std::int64_t f = 0; f < dd; ++f) {
      auto& best = per_feature[f];
      best.assign(n_active, SplitCandidate{});
      std::vector<double> gm(n_active, 0.0), hm(n_active, 0.0);
      std::vector<std::int64_t> cm(n_active, 0);
      for (const auto r : ps.missing[f]) {
        const int node = node_of[r];
        if (node < static_cast<int>(lvl_begin) || node >= static_cast<int>(lvl_end)) {
          continue;
        }
        const std::size_t s = node - lvl_begin;
        if (!splittable[s]) continue;
        gm[s] += g[r];
        hm[s] += h[r];
        ++cm[s];
      }

      std::vector<double> gl(n_active, 0.0), hl(n_active, 0.0);
      std::vector<std::int64_t> cl(n_active, 0);
      std::vector<double> prev(n_active, 0.0);
      const auto& rows = ps.rows[f];
      const auto& vals = ps.values[f];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::uint32_t r = rows[i];
        const int node = node_of[r];
        if (node < static_cast<int>(lvl_begin) || node >= static_cast<int>(lvl_end)) {
          continue;
        }
        const std::size_t s = node - lvl_begin;
        if (!splittable[s]) continue;
        const double v = vals[i];
        if (cl[s] > 0 && v != prev[s]) {
          double thr = 0.5 * (prev[s] + v);
          // Midpoints of adjacent representable values can collapse onto the
          // lower one; fall back to the upper value to keep the pair apart.
          if (!(prev[s] < thr)) thr = v;
          const std::size_t id = lvl_begin + s;
          const double parent = gain_score(g_sum[id], h_sum[id], params);
          for (const bool miss_left : {true, false}) {
            if (!miss_left && cm[s] == 0) break;
            const double G_l = gl[s] + (miss_left ? gm[s] : 0.0);
            const double H_l = hl[s] + (miss_left ? hm[s] : 0.0);
            const std::int64_t n_l = cl[s] + (miss_left ? cm[s] : 0);
            const std::int64_t n_r = count[id] - n_l;
            if (n_l < params.min_samples_leaf || n_r < params.min_samples_leaf) {
              continue;
            }
            const double G_r = g_sum[id] - G_l;
            const double H_r = h_sum[id] - H_l;
            const double gain = 0.5 * (gain_score(G_l, H_l, params) +
                                       gain_score(G_r, H_r, params) - parent);
            if (gain > best[s].gain) {
              best[s] = SplitCandidate{gain, static_cast<int>(f), thr,
                                       miss_left, G_l, H_l, n_l};
            }
          }
        }
        gl[s] += g[r];
        hl[s] += h[r];
        ++cl[s];
        prev[s] = v;
      }
    }

    std::vector<SplitCandidate> winner(n_active);
    for (std::size_t f = 0; f < d; ++f) {
      for (std::size_t s = 0; s < n_active; ++s) {
        if (per_feature[f][s].feature >= 0 &&
            per_feature[f][s].gain > winner[s].gain) {
          winner[s] = per_feature[f][s];
        }
      }
    }

    const std::size_t next_begin = nodes.size();
    for (std::size_t s = 0; s < n_active; ++s) {
      if (winner[s].feature < 0) continue;
      const std::size_t id = lvl_begin + s;
      const auto& w = winner[s];
      nodes[id].feature = w.feature;
      nodes[id].threshold = w.threshold;
      nodes[id].missing_left = w.missing_left;
      nodes[id].split_gain = w.gain;
      nodes[id].left = static_cast<int>(nodes.size());
      nodes[id].right = static_cast<int>(nodes.size() + 1);
      const double g_r = g_sum[id] - w.g_left;
      const double h_r = h_sum[id] - w.h_left;
      const std::int64_t n_r = count[id] - w.n_left;
      for (int side = 0; side < 2; ++side) {
        TreeNode child;
        const double G = side == 0 ? w.g_left : g_r;
        const double H = side == 0 ? w.h_left : h_r;
        const std::int64_t cnt = side == 0 ? w.n_left : n_r;
        child.value = leaf_score(G, H, params);
        child.weight = static_cast<double>(cnt);
        nodes.push_back(std::move(child));
        g_sum.push_back(G);
        h_sum.push_back(H);
        count.push_back(cnt);
      }
    }
    if (nodes.size() == next_begin) break;

    for (std::size_t r = 0; r < n; ++r) {
      const int id = node_of[r];
      if (id < static_cast<int>(lvl_begin) || id >= static_cast<int>(lvl_end) ||
          nodes[id].feature < 0) {
        continue;
      }
      const auto& nd = nodes[id];
      bool go_left;
      if (X.is_missing(r, nd.feature)) {
        go_left = nd.missing_left;
      } else {
        go_left = X.at(r, nd.feature) < nd.threshold;
      }
      node_of[r] = go_left ? nd.left : nd.right;
    }
    lvl_begin = next_begin;
    lvl_end = nodes.size();
  }

  // Bottom-up prune: children are created after parents, so a reverse walk
  // collapses weak subtrees leaves-first.
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto& nd = nodes[i];
    if (nd.feature < 0) continue;
    if (nodes[nd.left].feature < 0 && nodes[nd.right].feature < 0 &&
        nd.split_gain < params.gamma_min_gain) {
      nd.feature = -1;
      nd.left = -1;
      nd.right = -1;
    }
  }
  return tree;
}

void accumulate_scores(const DecisionTree& tree, const FeatureMatrix& X,
                       double eta, std::size_t cls, std::vector<double>& scores) {
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const int leaf = tree_leaf(tree, X, r, true);
    scores[r * kNumClasses + cls] += eta * tree.nodes[leaf].value;
  }
}

void softmax_rows(const std::vector<double>& scores, std::vector<double>& proba) {
  const std::size_t n = scores.size() / kNumClasses;
  proba.resize(scores.size());
  for (std::size_t r = 0; r < n; ++r) {
    const double* s = scores.data() + r * kNumClasses;
    double* p = proba.data() + r * kNumClasses;
    double mx = s[0];
    for (int c = 1; c < kNumClasses; ++c) mx = std::max(mx, s[c]);
    double total = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      p[c] = std::exp(s[c] - mx);
      total += p[c];
    }
    for (int c = 0; c < kNumClasses; ++c) p[c] /= total;
  }
}

double mean_logloss(const std::vector<double>& proba,
                    const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    loss -= std::log(std::max(proba[r * kNumClasses + labels[r]], 1e-15));
  }
  return loss / static_cast<double>(labels.size());
}

}  // namespace

GbtModel fit_gbt(const FeatureMatrix& train, const GbtParams& params,
                 std::uint64_t seed, const FeatureMatrix* validation,
                 int n_threads) {
  (void)seed;  // fitting is deterministic; kept for interface uniformity
  if (train.rows() == 0) throw DataError("cannot boost on zero rows");
  if (train.labels.size() != train.rows()) {
    throw DataError("boosting needs one label per row");
  }
  if (validation != nullptr && validation->cols() != train.cols()) {
    throw DataError("validation feature count does not match training");
  }

  GbtModel model;
  model.params = params;
  model.feature_names = train.feature_names();

  const Presort ps = build_presort(train);
  const std::size_t n = train.rows();
  std::vector<double> scores(n * kNumClasses, params.base_score);
  std::vector<double> val_scores;
  if (validation != nullptr) {
    val_scores.assign(validation->rows() * kNumClasses, params.base_score);
  }
  std::vector<double> proba, val_proba;
  std::vector<double> g(n), h(n);
  std::vector<int> node_of(n, 0);

  double best_val = std::numeric_limits<double>::infinity();
  int best_seen = -1;  // round with the lowest validation loss so far
  for (int round = 0; round < params.n_rounds; ++round) {
    softmax_rows(scores, proba);
    std::vector<std::vector<DecisionTree>>& rounds = model.rounds;
    rounds.emplace_back();
    for (int cls = 0; cls < kNumClasses; ++cls) {
      for (std::size_t r = 0; r < n; ++r) {
        const double p = proba[r * kNumClasses + cls];
        g[r] = p - (train.labels[r] == cls ? 1.0 : 0.0);
        h[r] = p * (1.0 - p);
        if (!std::isfinite(g[r]) || !std::isfinite(h[r])) {
          throw DataError("non-finite gradient at round " +
                          std::to_string(round));
        }
      }
      rounds.back().push_back(
          fit_gradient_tree(train, ps, g, h, params, n_threads, node_of));
      accumulate_scores(rounds.back().back(), train, params.eta, cls, scores);
      if (validation != nullptr) {
        accumulate_scores(rounds.back().back(), *validation, params.eta, cls,
                          val_scores);
      }
    }
    softmax_rows(scores, proba);
    model.train_logloss.push_back(mean_logloss(proba, train.labels));
    model.best_round = round;

    if (validation != nullptr) {
      softmax_rows(val_scores, val_proba);
      const double vloss = mean_logloss(val_proba, validation->labels);
      model.valid_logloss.push_back(vloss);
      if (vloss < best_val - 1e-12) {
        best_val = vloss;
        best_seen = round;
      }
      model.best_round = best_seen >= 0 ? best_seen : round;
      if (params.early_stopping_rounds > 0 &&
          round - model.best_round >= params.early_stopping_rounds) {
        break;
      }
    }
  }
  return model;
}

std::vector<double> predict_proba(const GbtModel& model, const FeatureMatrix& X,
                                  int n_threads) {
  if (X.cols() != model.feature_names.size()) {
    throw DataError("feature count does not match the trained model");
  }
  std::vector<double> scores(X.rows() * kNumClasses, model.params.base_score);
  const std::int64_t n = static_cast<std::int64_t>(X.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t r = 0; r < n; ++r) {
    double* s = scores.data() + r * kNumClasses;
    for (int round = 0; round <= model.best_round; ++round) {
      for (int cls = 0; cls < kNumClasses; ++cls) {
        const auto& tree = model.rounds[round][cls];
        const int leaf = tree_leaf(tree, X, r, true);
        s[cls] += model.params.eta * tree.nodes[leaf].value;
      }
    }
  }
  std::vector<double> proba;
  softmax_rows(scores, proba);
  return proba;
}

std::vector<int> predict(const GbtModel& model, const FeatureMatrix& X,
                         int n_threads) {
  const auto proba = predict_proba(model, X, n_threads);
  std::vector<int> labels(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    labels[r] = argmax_smallest({proba.data() + r * kNumClasses, kNumClasses});
  }
  return labels;
}

}  // namespace crashsev
