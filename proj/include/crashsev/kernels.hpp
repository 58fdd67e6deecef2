#pragma once

// Shared data-parallel kernels. Each has an OpenMP implementation and a plain
// serial reference; outputs are written to slots indexed by loop position, so
// both paths produce bit-identical results and the tests hold them to that.

#include <cstddef>
#include <span>
#include <vector>

#include "crashsev/matrix.hpp"

namespace crashsev {
namespace kernels {

// For each query row (members[q]), the k nearest other member rows by
// Euclidean distance, nearest first; ties broken by smaller row index.
std::vector<std::vector<std::size_t>> knn(const FeatureMatrix& X,
                                          std::span<const std::size_t> members,
                                          int k, int n_threads);
std::vector<std::vector<std::size_t>> knn_serial(
    const FeatureMatrix& X, std::span<const std::size_t> members, int k);

double squared_distance(const FeatureMatrix& X, std::size_t a, std::size_t b);

}  // namespace kernels
}  // namespace crashsev
