#pragma once

// Synthetic minority oversampling. Each synthetic row interpolates a
// minority sample toward one of its k nearest same-class neighbours:
// x_new = x_i + delta * (x_j - x_i), delta uniform in [delta_min, delta_max).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crashsev/matrix.hpp"

namespace crashsev {

struct SmoteParams {
  int k_neighbors = 5;
  std::uint64_t seed = 0;
  double delta_min = 0.0;
  double delta_max = 1.0;
  // Target strategy: every minority class is raised to the majority count.
};

struct SmoteProvenance {
  int cls = 0;
  std::size_t i_row = 0;  // base sample, index into the output matrix
  std::size_t j_row = 0;  // neighbour
  double delta = 0.0;
};

struct SmoteResult {
  FeatureMatrix data;     // originals first (unchanged), synthetics appended
  std::vector<SmoteProvenance> provenance;  // one entry per synthetic row
  std::size_t n_original = 0;
};

// Training partition only; applying to validation/test data throws. Each
// minority class draws from its own RNG stream derived from (seed, class
// code), so per-class generation is order-independent.
SmoteResult smote_resample(const FeatureMatrix& train, const SmoteParams& params);

void save_provenance_csv(const std::string& path, const SmoteResult& result);

}  // namespace crashsev
