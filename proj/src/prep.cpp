#include "crashsev/prep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "crashsev/csv.hpp"
#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureMatrix build_frame_ptrs(const std::vector<const CrashRecord*>& recs,
                               const SchemaConfig& schema) {
  const std::size_t n = recs.size();
  const std::size_t n_cat = schema.categorical_cols.size();
  const std::size_t n_num = schema.numeric_cols.size();
  FeatureMatrix m(n, n_cat + n_num);

  for (std::size_t f = 0; f < n_cat; ++f) {
    const std::string& field = schema.categorical_cols[f];
    std::set<std::string> observed;
    for (const auto* rec : recs) {
      const auto it = rec->categorical.find(field);
      if (it != rec->categorical.end()) observed.insert(it->second);
    }
    ColumnMeta& meta = m.columns[f];
    meta.name = field;
    meta.kind = ColumnKind::Categorical;
    meta.categories.assign(observed.begin(), observed.end());
    std::map<std::string, int> code;
    for (std::size_t c = 0; c < meta.categories.size(); ++c) {
      code[meta.categories[c]] = static_cast<int>(c);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const auto it = recs[r]->categorical.find(field);
      if (it == recs[r]->categorical.end()) {
        m.at(r, f) = kNaN;
        m.set_missing(r, f, true);
      } else {
        m.at(r, f) = static_cast<double>(code.at(it->second));
      }
    }
  }
  for (std::size_t f = 0; f < n_num; ++f) {
    const std::string& field = schema.numeric_cols[f];
    const std::size_t col = n_cat + f;
    m.columns[col].name = field;
    m.columns[col].kind = ColumnKind::Numeric;
    for (std::size_t r = 0; r < n; ++r) {
      const auto it = recs[r]->numeric.find(field);
      if (it == recs[r]->numeric.end()) {
        m.at(r, col) = kNaN;
        m.set_missing(r, col, true);
      } else {
        m.at(r, col) = it->second;
      }
    }
  }
  m.labels.resize(n);
  m.row_ids.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    m.labels[r] = static_cast<int>(recs[r]->severity);
    m.row_ids[r] = recs[r]->record_id;
  }
  return m;
}

}  // namespace

FeatureMatrix build_frame(std::span<const CrashRecord> records,
                          const SchemaConfig& schema) {
  std::vector<const CrashRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& rec : records) ptrs.push_back(&rec);
  return build_frame_ptrs(ptrs, schema);
}

FeatureMatrix build_frame(const std::vector<CrashRecord>& records,
                          std::span<const std::size_t> indices,
                          const SchemaConfig& schema) {
  std::vector<const CrashRecord*> ptrs;
  ptrs.reserve(indices.size());
  for (const std::size_t i : indices) {
    if (i >= records.size()) throw DataError("record index out of range");
    ptrs.push_back(&records[i]);
  }
  return build_frame_ptrs(ptrs, schema);
}

std::vector<std::string> gather_narratives(
    const std::vector<CrashRecord>& records,
    std::span<const std::size_t> indices) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) {
    if (i >= records.size()) throw DataError("record index out of range");
    out.push_back(records[i].narrative);
  }
  return out;
}

FeatureMatrix clean_features(const FeatureMatrix& m, double drop_threshold,
                             CleanReport* report) {
  const std::size_t n = m.rows();
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::size_t missing = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (m.is_missing(r, c)) ++missing;
    }
    const double frac = n == 0 ? 0.0 : static_cast<double>(missing) / n;
    if (frac > drop_threshold) {
      if (report) report->dropped_columns.push_back(m.columns[c].name);
    } else {
      keep.push_back(c);
    }
  }
  FeatureMatrix out = m.select_columns(keep);

  for (std::size_t c = 0; c < out.cols(); ++c) {
    std::vector<double> observed;
    observed.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      if (!out.is_missing(r, c)) observed.push_back(out.at(r, c));
    }
    double fill = 0.0;
    if (!observed.empty()) {
      if (out.columns[c].kind == ColumnKind::Categorical) {
        // Mode; a tie goes to the smallest code, which is the
        // lexicographically smallest category by construction.
        std::map<int, std::size_t> counts;
        for (const double v : observed) ++counts[static_cast<int>(v)];
        int best = counts.begin()->first;
        std::size_t best_n = counts.begin()->second;
        for (const auto& [code, cnt] : counts) {
          if (cnt > best_n) {
            best = code;
            best_n = cnt;
          }
        }
        fill = static_cast<double>(best);
      } else {
        std::sort(observed.begin(), observed.end());
        fill = observed[(observed.size() - 1) / 2];
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (out.is_missing(r, c)) out.at(r, c) = fill;
    }
  }
  out.check_invariants();
  return out;
}

void CategoricalEncoder::fit(const FeatureMatrix& frame) {
  fields_.clear();
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    if (frame.columns[c].kind != ColumnKind::Categorical) continue;
    FittedField field;
    field.name = frame.columns[c].name;
    std::set<int> codes;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
      if (frame.is_missing(r, c)) continue;
      codes.insert(static_cast<int>(frame.at(r, c)));
    }
    for (const int code : codes) {
      if (code < 0 || code >= static_cast<int>(frame.columns[c].categories.size())) {
        throw DataError("category code out of range in column " + field.name);
      }
      field.categories.push_back(frame.columns[c].categories[code]);
    }
    fields_.push_back(std::move(field));
  }
  fitted_ = true;
}

FeatureMatrix CategoricalEncoder::transform(const FeatureMatrix& frame,
                                            std::size_t* unseen_count) const {
  if (!fitted_) throw DataError("encoder used before fit");
  std::size_t out_cols = 0;
  std::vector<const FittedField*> by_col(frame.cols(), nullptr);
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    if (frame.columns[c].kind == ColumnKind::Categorical) {
      const FittedField* found = nullptr;
      for (const auto& f : fields_) {
        if (f.name == frame.columns[c].name) {
          found = &f;
          break;
        }
      }
      if (!found) {
        throw DataError("encoder was not fitted on column " +
                        frame.columns[c].name);
      }
      by_col[c] = found;
      out_cols += found->categories.size();
    } else {
      ++out_cols;
    }
  }

  FeatureMatrix out(frame.rows(), out_cols);
  out.labels = frame.labels;
  out.row_ids = frame.row_ids;
  out.partition = frame.partition;
  std::size_t oc = 0;
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    if (const FittedField* field = by_col[c]) {
      std::map<std::string, std::size_t> slot;
      for (std::size_t k = 0; k < field->categories.size(); ++k) {
        slot[field->categories[k]] = k;
        out.columns[oc + k].name = field->name + "=" + field->categories[k];
        out.columns[oc + k].kind = ColumnKind::OneHot;
      }
      for (std::size_t r = 0; r < frame.rows(); ++r) {
        const bool miss = frame.is_missing(r, c);
        std::size_t hit = field->categories.size();
        if (!std::isnan(frame.at(r, c))) {
          const int code = static_cast<int>(frame.at(r, c));
          if (code < 0 ||
              code >= static_cast<int>(frame.columns[c].categories.size())) {
            throw DataError("category code out of range in column " +
                            frame.columns[c].name);
          }
          const auto it = slot.find(frame.columns[c].categories[code]);
          if (it != slot.end()) {
            hit = it->second;
          } else if (!miss && unseen_count) {
            ++*unseen_count;
          }
        }
        for (std::size_t k = 0; k < field->categories.size(); ++k) {
          out.at(r, oc + k) = k == hit ? 1.0 : 0.0;
          if (miss) out.set_missing(r, oc + k, true);
        }
      }
      oc += field->categories.size();
    } else {
      out.columns[oc] = frame.columns[c];
      for (std::size_t r = 0; r < frame.rows(); ++r) {
        out.at(r, oc) = frame.at(r, c);
        if (frame.is_missing(r, c)) out.set_missing(r, oc, true);
      }
      ++oc;
    }
  }
  out.check_invariants();
  return out;
}

FeatureMatrix encode_categoricals(const FeatureMatrix& frame,
                                  std::size_t* unseen_count) {
  CategoricalEncoder enc;
  enc.fit(frame);
  return enc.transform(frame, unseen_count);
}

SplitBundle stratified_split(const FeatureMatrix& m,
                             std::array<double, 3> proportions,
                             std::uint64_t seed) {
  double sum = 0.0;
  for (const double p : proportions) {
    if (p < 0.0) throw DataError("split proportions must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split proportions must sum to 1");
  }
  if (m.labels.size() != m.rows()) {
    throw DataError("stratified split needs one label per row");
  }

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const int y = m.labels[r];
    if (y < 0 || y >= kNumClasses) throw DataError("label out of range");
    by_class[y].push_back(r);
  }

  std::array<std::vector<std::size_t>, 3> parts;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    auto& rows = by_class[cls];
    if (rows.empty()) continue;
    if (rows.size() < 3) {
      throw DataError(std::string("class ") +
                      severity_name(static_cast<SeverityLabel>(cls)) +
                      " has only " +
                      std::to_string(rows.size()) +
                      " rows; need at least 3 to split");
    }
    // Largest-remainder apportionment keeps every part within one row of its
    // exact stratified share.
    const std::size_t n_c = rows.size();
    std::array<std::size_t, 3> quota{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
      const double target = n_c * proportions[p];
      quota[p] = static_cast<std::size_t>(std::floor(target));
      frac[p] = target - static_cast<double>(quota[p]);
      assigned += quota[p];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (std::size_t leftover = n_c - assigned, i = 0; leftover > 0;
         --leftover, ++i) {
      ++quota[order[i % 3]];
    }

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(rows);
    std::size_t cursor = 0;
    for (int p = 0; p < 3; ++p) {
      for (std::size_t i = 0; i < quota[p]; ++i) {
        parts[p].push_back(rows[cursor++]);
      }
    }
  }

  SplitBundle bundle;
  for (auto& part : parts) std::sort(part.begin(), part.end());
  bundle.train_rows = std::move(parts[0]);
  bundle.validation_rows = std::move(parts[1]);
  bundle.test_rows = std::move(parts[2]);
  bundle.train = m.select_rows(bundle.train_rows);
  bundle.train.partition = Partition::Train;
  bundle.validation = m.select_rows(bundle.validation_rows);
  bundle.validation.partition = Partition::Validation;
  bundle.test = m.select_rows(bundle.test_rows);
  bundle.test.partition = Partition::Test;
  return bundle;
}

DatasetView screen_view(const DatasetView& view, const std::vector<int>& labels,
                        int min_per_class) {
  DatasetView out = view;
  std::array<std::int64_t, kNumClasses> counts{};
  for (const std::size_t r : view.record_ids) {
    if (r >= labels.size()) throw DataError("view references a missing record");
    const int y = labels[r];
    if (y < 0 || y >= kNumClasses) throw DataError("label out of range");
    ++counts[y];
  }
  out.trainable = true;
  out.skip_reason.clear();
  for (int cls = 0; cls < kNumClasses; ++cls) {
    if (counts[cls] < min_per_class) {
      out.trainable = false;
      out.skip_reason =
          std::string(severity_name(static_cast<SeverityLabel>(cls))) +
          " count " +
                        std::to_string(counts[cls]) + " below minimum " +
                        std::to_string(min_per_class);
      break;
    }
  }
  return out;
}

namespace {

void write_part_csv(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "row_id,label";
  for (const auto& col : m.columns) out << ',' << csv_field(col.name);
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << csv_field(m.row_ids.empty() ? std::string() : m.row_ids[r]) << ','
        << (m.labels.empty() ? 0 : m.labels[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace

void save_split(const std::string& dir, const SplitBundle& bundle) {
  std::filesystem::create_directories(dir);
  write_part_csv(dir + "/train.csv", bundle.train);
  write_part_csv(dir + "/validation.csv", bundle.validation);
  write_part_csv(dir + "/test.csv", bundle.test);
}

}  // namespace crashsev
