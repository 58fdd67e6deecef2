#include "crashsev/matrix.hpp"

#include <cmath>

#include "crashsev/error.hpp"

namespace crashsev {

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::Unsplit: return "unsplit";
    case Partition::Train: return "train";
    case Partition::Validation: return "validation";
    case Partition::Test: return "test";
  }
  return "?";
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : columns(cols), rows_(rows), cols_(cols), values_(rows * cols, 0.0),
      missing_(rows * cols, 0) {}

std::vector<std::string> FeatureMatrix::feature_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

bool FeatureMatrix::any_missing() const {
  for (auto m : missing_) {
    if (m) return true;
  }
  return false;
}

std::array<std::int64_t, kNumClasses> FeatureMatrix::class_counts() const {
  std::array<std::int64_t, kNumClasses> counts{};
  for (int y : labels) {
    if (y < 0 || y >= kNumClasses) {
      throw DataError("label out of range: " + std::to_string(y));
    }
    ++counts[y];
  }
  return counts;
}

FeatureMatrix FeatureMatrix::select_rows(
    std::span<const std::size_t> rows) const {
  FeatureMatrix out(rows.size(), cols_);
  out.columns = columns;
  out.partition = partition;
  out.labels.reserve(labels.empty() ? 0 : rows.size());
  out.row_ids.reserve(row_ids.empty() ? 0 : rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= rows_) throw DataError("row index out of range");
    for (std::size_t c = 0; c < cols_; ++c) {
      out.at(i, c) = at(r, c);
      out.set_missing(i, c, is_missing(r, c));
    }
    if (!labels.empty()) out.labels.push_back(labels[r]);
    if (!row_ids.empty()) out.row_ids.push_back(row_ids[r]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(
    std::span<const std::size_t> cols) const {
  FeatureMatrix out(rows_, cols.size());
  out.labels = labels;
  out.row_ids = row_ids;
  out.partition = partition;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= cols_) throw DataError("column index out of range");
    out.columns[j] = columns[cols[j]];
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.at(r, j) = at(r, cols[j]);
      out.set_missing(r, j, is_missing(r, cols[j]));
    }
  }
  return out;
}

void FeatureMatrix::append_row(std::span<const double> values, int label,
                               std::string row_id) {
  if (values.size() != cols_) throw DataError("appended row width mismatch");
  values_.insert(values_.end(), values.begin(), values.end());
  missing_.insert(missing_.end(), cols_, 0);
  ++rows_;
  if (labels.size() + 1 == rows_) {
    labels.push_back(label);
  } else if (!labels.empty()) {
    throw DataError("labels out of sync with rows");
  }
  if (row_ids.size() + 1 == rows_) {
    row_ids.push_back(std::move(row_id));
  } else if (!row_ids.empty()) {
    throw DataError("row ids out of sync with rows");
  }
}

FeatureMatrix FeatureMatrix::hstack(const FeatureMatrix& a,
                                    const FeatureMatrix& b) {
  if (a.rows_ != b.rows_) throw DataError("hstack: row count mismatch");
  FeatureMatrix out(a.rows_, a.cols_ + b.cols_);
  out.labels = a.labels;
  out.row_ids = a.row_ids;
  out.partition = a.partition;
  for (std::size_t c = 0; c < a.cols_; ++c) out.columns[c] = a.columns[c];
  for (std::size_t c = 0; c < b.cols_; ++c) out.columns[a.cols_ + c] = b.columns[c];
  for (std::size_t r = 0; r < a.rows_; ++r) {
    for (std::size_t c = 0; c < a.cols_; ++c) {
      out.at(r, c) = a.at(r, c);
      out.set_missing(r, c, a.is_missing(r, c));
    }
    for (std::size_t c = 0; c < b.cols_; ++c) {
      out.at(r, a.cols_ + c) = b.at(r, c);
      out.set_missing(r, a.cols_ + c, b.is_missing(r, c));
    }
  }
  return out;
}

void FeatureMatrix::check_invariants() const {
  if (columns.size() != cols_) throw DataError("column metadata width mismatch");
  if (!labels.empty() && labels.size() != rows_) {
    throw DataError("label count does not match row count");
  }
  if (!row_ids.empty() && row_ids.size() != rows_) {
    throw DataError("row id count does not match row count");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!is_missing(r, c) && !std::isfinite(at(r, c))) {
        throw DataError("non-finite value in non-missing cell");
      }
    }
  }
  for (int y : labels) {
    if (y < 0 || y >= kNumClasses) throw DataError("label out of range");
  }
}

}  // namespace crashsev
