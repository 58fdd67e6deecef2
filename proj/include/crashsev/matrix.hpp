#pragma once

// Dense row-major feature matrix with a per-cell missing mask. The same type
// carries the pipeline from raw tabular form (numeric + integer-coded
// categorical columns) through one-hot encoding and text fusion; ColumnKind
// records what each column holds.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crashsev/types.hpp"

namespace crashsev {

enum class ColumnKind : int { Numeric = 0, Categorical = 1, OneHot = 2, Text = 3 };

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  // For Categorical columns: code -> category string, lexicographic order.
  std::vector<std::string> categories;
};

enum class Partition : int { Unsplit = 0, Train = 1, Validation = 2, Test = 3 };

const char* partition_name(Partition p);

class FeatureMatrix {
 public:
  std::vector<ColumnMeta> columns;
  std::vector<int> labels;        // severity codes, one per row (may be empty)
  std::vector<std::string> row_ids;
  Partition partition = Partition::Unsplit;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  bool is_missing(std::size_t r, std::size_t c) const {
    return missing_[r * cols_ + c] != 0;
  }
  void set_missing(std::size_t r, std::size_t c, bool m) {
    missing_[r * cols_ + c] = m ? 1 : 0;
  }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const std::uint8_t> row_mask(std::size_t r) const {
    return {missing_.data() + r * cols_, cols_};
  }

  std::vector<std::string> feature_names() const;
  bool any_missing() const;
  std::array<std::int64_t, kNumClasses> class_counts() const;

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;
  void append_row(std::span<const double> values, int label, std::string row_id);

  // Columns of b appended to a; rows must align. Labels, ids, and partition
  // come from a.
  static FeatureMatrix hstack(const FeatureMatrix& a, const FeatureMatrix& b);

  // Throws DataError on shape mismatches or NaN values in non-missing cells.
  void check_invariants() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

}  // namespace crashsev
