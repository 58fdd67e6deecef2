#include "crashsev/kernels.hpp"

#include <algorithm>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/error.hpp"

namespace crashsev {
namespace kernels {

double squared_distance(const FeatureMatrix& X, std::size_t a, std::size_t b) {
  const auto ra = X.row(a);
  const auto rb = X.row(b);
  double acc = 0.0;
  for (std::size_t c = 0; c < ra.size(); ++c) {
    const double d = ra[c] - rb[c];
    acc += d * d;
  }
  return acc;
}

namespace {

std::vector<std::size_t> neighbors_of(const FeatureMatrix& X,
                                      std::span<const std::size_t> members,
                                      std::size_t q, int k) {
  std::vector<std::pair<double, std::size_t>> dists;
  dists.reserve(members.size() - 1);
  for (std::size_t pos = 0; pos < members.size(); ++pos) {
    if (pos == q) continue;
    dists.emplace_back(squared_distance(X, members[q], members[pos]),
                       members[pos]);
  }
  const std::size_t keep = std::min<std::size_t>(k, dists.size());
  std::partial_sort(dists.begin(), dists.begin() + keep, dists.end());
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(dists[i].second);
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> knn_serial(
    const FeatureMatrix& X, std::span<const std::size_t> members, int k) {
  if (k < 1) throw DataError("neighbor count must be positive");
  std::vector<std::vector<std::size_t>> out(members.size());
  for (std::size_t q = 0; q < members.size(); ++q) {
    out[q] = neighbors_of(X, members, q, k);
  }
  return out;
}

std::vector<std::vector<std::size_t>> knn(const FeatureMatrix& X,
                                          std::span<const std::size_t> members,
                                          int k, int n_threads) {
  if (k < 1) throw DataError("neighbor count must be positive");
  std::vector<std::vector<std::size_t>> out(members.size());
  const std::int64_t n = static_cast<std::int64_t>(members.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t q = 0; q < n; ++q) {
    out[q] = neighbors_of(X, members, static_cast<std::size_t>(q), k);
  }
  return out;
}

}  // namespace kernels
}  // namespace crashsev
