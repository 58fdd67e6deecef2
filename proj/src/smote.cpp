#include "crashsev/smote.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "crashsev/error.hpp"
#include "crashsev/kernels.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

SmoteResult smote_resample(const FeatureMatrix& train,
                           const SmoteParams& params) {
  if (train.partition == Partition::Validation ||
      train.partition == Partition::Test) {
    throw DataError(std::string("refusing to oversample the ") +
                    partition_name(train.partition) + " partition");
  }
  if (train.labels.size() != train.rows()) {
    throw DataError("oversampling needs one label per row");
  }
  if (params.k_neighbors < 1) throw DataError("neighbor count must be positive");
  if (!(params.delta_min <= params.delta_max)) {
    throw DataError("delta_min must not exceed delta_max");
  }

  SmoteResult result;
  result.data = train;
  result.n_original = train.rows();

  const auto counts = train.class_counts();
  std::int64_t majority = 0;
  for (const auto c : counts) majority = std::max(majority, c);
  if (majority == 0) return result;

  for (int cls = 0; cls < kNumClasses; ++cls) {
    const std::int64_t n_c = counts[cls];
    if (n_c == 0 || n_c >= majority) continue;
    std::vector<std::size_t> members;
    members.reserve(n_c);
    for (std::size_t r = 0; r < train.rows(); ++r) {
      if (train.labels[r] == cls) members.push_back(r);
    }
    if (members.size() < 2) {
      throw DataError(std::string("class ") +
                      severity_name(static_cast<SeverityLabel>(cls)) +
                      " has a single row; cannot interpolate");
    }
    const auto neighbors =
        kernels::knn(train, members, params.k_neighbors, 1);

    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(cls)));
    const std::int64_t need = majority - n_c;
    for (std::int64_t s = 0; s < need; ++s) {
      const std::size_t i_local = static_cast<std::size_t>(s % n_c);
      const auto& nbrs = neighbors[i_local];
      const std::size_t j_row = nbrs[rng.uniform_int(nbrs.size())];
      const double u = rng.uniform01();
      const double delta =
          params.delta_min + u * (params.delta_max - params.delta_min);
      const std::size_t i_row = members[i_local];
      std::vector<double> values(train.cols());
      for (std::size_t c = 0; c < train.cols(); ++c) {
        const double xi = train.at(i_row, c);
        values[c] = xi + delta * (train.at(j_row, c) - xi);
      }
      result.data.append_row(values, cls,
                             "smote:" + std::to_string(cls) + ":" +
                                 std::to_string(s));
      result.provenance.push_back(
          SmoteProvenance{cls, i_row, j_row, delta});
    }
  }
  result.data.check_invariants();
  return result;
}

void save_provenance_csv(const std::string& path, const SmoteResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "row_id,class,base_row,neighbor_row,delta\n";
  char buf[64];
  for (std::size_t s = 0; s < result.provenance.size(); ++s) {
    const auto& p = result.provenance[s];
    std::snprintf(buf, sizeof(buf), "%.17g", p.delta);
    out << result.data.row_ids[result.n_original + s] << ',' << p.cls << ','
        << p.i_row << ',' << p.j_row << ',' << buf << '\n';
  }
}

}  // namespace crashsev
