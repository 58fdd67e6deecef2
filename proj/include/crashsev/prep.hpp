#pragma once

// Tabular preparation: frame construction from records, missing-data
// cleaning, one-hot encoding, stratified splitting, and view screening.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crashsev/matrix.hpp"
#include "crashsev/schema.hpp"
#include "crashsev/types.hpp"

namespace crashsev {

// Records -> tabular frame: categorical fields become integer-coded columns
// (codes assigned lexicographically), numeric fields pass through. Missing
// cells get NaN values and a set mask bit. Field order follows the schema.
FeatureMatrix build_frame(std::span<const CrashRecord> records,
                          const SchemaConfig& schema);
FeatureMatrix build_frame(const std::vector<CrashRecord>& records,
                          std::span<const std::size_t> indices,
                          const SchemaConfig& schema);

std::vector<std::string> gather_narratives(
    const std::vector<CrashRecord>& records,
    std::span<const std::size_t> indices);

struct CleanReport {
  std::vector<std::string> dropped_columns;
};

// Drops columns whose missing fraction strictly exceeds drop_threshold, then
// imputes what remains: categorical by mode (ties to the lexicographically
// smallest category), numeric by lower median. The pre-imputation mask is
// preserved so downstream learners can still see what was absent.
FeatureMatrix clean_features(const FeatureMatrix& m, double drop_threshold = 0.5,
                             CleanReport* report = nullptr);

// One-hot expansion fitted on observed categories. Transforming a row whose
// category was unseen at fit time yields an all-zero block and bumps the
// diagnostic counter.
class CategoricalEncoder {
 public:
  void fit(const FeatureMatrix& frame);
  FeatureMatrix transform(const FeatureMatrix& frame,
                          std::size_t* unseen_count = nullptr) const;
  bool fitted() const { return fitted_; }

 private:
  struct FittedField {
    std::string name;
    std::vector<std::string> categories;  // lexicographic
  };
  std::vector<FittedField> fields_;
  bool fitted_ = false;
};

FeatureMatrix encode_categoricals(const FeatureMatrix& frame,
                                  std::size_t* unseen_count = nullptr);

struct SplitBundle {
  FeatureMatrix train;
  FeatureMatrix validation;
  FeatureMatrix test;
  // Original-row indices (ascending) behind each part, for slicing anything
  // carried alongside the matrix (narratives, ids).
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
};

// Per-class shuffled assignment. Each part's per-class count lands within one
// row of the exact stratified target; identical inputs and seed reproduce the
// split exactly. A present class with fewer than 3 rows is an error.
SplitBundle stratified_split(const FeatureMatrix& m,
                             std::array<double, 3> proportions,
                             std::uint64_t seed);

// Marks a view untrainable when any severity class has fewer than
// min_per_class records, naming the first offending class.
DatasetView screen_view(const DatasetView& view, const std::vector<int>& labels,
                        int min_per_class = 10);

void save_split(const std::string& dir, const SplitBundle& bundle);

}  // namespace crashsev
