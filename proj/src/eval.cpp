#include "crashsev/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "crashsev/error.hpp"

namespace crashsev {

ConfusionMatrix ConfusionMatrix::from(std::span<const int> y_true,
                                      std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("prediction/label length mismatch");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses) {
      throw DataError("class code out of range in evaluation input");
    }
    ++cm.counts[t][p];
  }
  return cm;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t n = 0;
  for (int k = 0; k < kNumClasses; ++k) n += counts[k][k];
  return n;
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw DataError("macro average of empty vector");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double weighted_average(std::span<const double> values,
                        std::span<const std::int64_t> supports) {
  if (values.size() != supports.size() || values.empty()) {
    throw DataError("weighted average: length mismatch or empty input");
  }
  double num = 0.0;
  std::int64_t den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += values[i] * static_cast<double>(supports[i]);
    den += supports[i];
  }
  if (den <= 0) throw DataError("weighted average: zero total support");
  return num / static_cast<double>(den);
}

EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty()) throw DataError("evaluate: empty input");
  EvalReport r;
  r.confusion = ConfusionMatrix::from(y_true, y_pred);
  r.total = r.confusion.total();

  std::vector<double> present_p, present_r, present_f;
  std::vector<double> all_p(kNumClasses), all_r(kNumClasses), all_f(kNumClasses);
  std::vector<std::int64_t> all_support(kNumClasses);

  for (int k = 0; k < kNumClasses; ++k) {
    std::int64_t tp = r.confusion.counts[k][k];
    std::int64_t support = 0, predicted = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      support += r.confusion.counts[k][j];
      predicted += r.confusion.counts[j][k];
    }
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    if (predicted > 0) {
      precision = static_cast<double>(tp) / static_cast<double>(predicted);
    } else if (support > 0) {
      ++r.zero_predicted_classes;  // never predicted despite real support
    }
    if (support > 0) recall = static_cast<double>(tp) / static_cast<double>(support);
    if (precision + recall > 0.0) {
      f1 = 2.0 * precision * recall / (precision + recall);
    }
    r.per_class[k] = {precision, recall, f1, support};
    all_p[k] = precision;
    all_r[k] = recall;
    all_f[k] = f1;
    all_support[k] = support;
    if (support > 0) {
      present_p.push_back(precision);
      present_r.push_back(recall);
      present_f.push_back(f1);
    }
  }

  if (present_f.empty()) throw DataError("evaluate: no class has support");
  r.macro_precision = macro_average(present_p);
  r.macro_recall = macro_average(present_r);
  r.macro_f1 = macro_average(present_f);
  r.weighted_precision = weighted_average(all_p, all_support);
  r.weighted_recall = weighted_average(all_r, all_support);
  r.weighted_f1 = weighted_average(all_f, all_support);
  r.accuracy =
      static_cast<double>(r.confusion.trace()) / static_cast<double>(r.total);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per;
  for (int k = 0; k < kNumClasses; ++k) {
    per[severity_name(static_cast<SeverityLabel>(k))] = {
        {"precision", per_class[k].precision},
        {"recall", per_class[k].recall},
        {"f1", per_class[k].f1},
        {"support", per_class[k].support},
    };
  }
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : confusion_rows_json()) confusion.push_back(row);
  return nlohmann::json{
      {"config_id", config_id},
      {"per_class", per},
      {"macro", {{"precision", macro_precision},
                 {"recall", macro_recall},
                 {"f1", macro_f1}}},
      {"weighted", {{"precision", weighted_precision},
                    {"recall", weighted_recall},
                    {"f1", weighted_f1}}},
      {"accuracy", accuracy},
      {"total", total},
      {"zero_predicted_classes", zero_predicted_classes},
      {"confusion", confusion},
  };
}

std::vector<std::vector<std::int64_t>> EvalReport::confusion_rows_json() const {
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& row : confusion.counts) {
    rows.emplace_back(row.begin(), row.end());
  }
  return rows;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.config_id = j.value("config_id", "");
  for (int k = 0; k < kNumClasses; ++k) {
    const auto& p = j.at("per_class").at(severity_name(static_cast<SeverityLabel>(k)));
    r.per_class[k] = {p.at("precision").get<double>(), p.at("recall").get<double>(),
                      p.at("f1").get<double>(), p.at("support").get<std::int64_t>()};
  }
  r.macro_precision = j.at("macro").at("precision").get<double>();
  r.macro_recall = j.at("macro").at("recall").get<double>();
  r.macro_f1 = j.at("macro").at("f1").get<double>();
  r.weighted_precision = j.at("weighted").at("precision").get<double>();
  r.weighted_recall = j.at("weighted").at("recall").get<double>();
  r.weighted_f1 = j.at("weighted").at("f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.total = j.at("total").get<std::int64_t>();
  r.zero_predicted_classes = j.value("zero_predicted_classes", 0);
  if (j.contains("confusion")) {
    const auto rows = j.at("confusion").get<std::vector<std::vector<std::int64_t>>>();
    for (int a = 0; a < kNumClasses; ++a) {
      for (int b = 0; b < kNumClasses; ++b) r.confusion.counts[a][b] = rows[a][b];
    }
  }
  return r;
}

std::string EvalReport::to_table() const {
  char buf[160];
  std::string out;
  out += "Injury type       Precision  Recall  F1-score  Support\n";
  for (int k = 0; k < kNumClasses; ++k) {
    std::snprintf(buf, sizeof(buf), "%-17s %9.3f %7.3f %9.3f %8lld\n",
                  severity_name(static_cast<SeverityLabel>(k)),
                  per_class[k].precision, per_class[k].recall, per_class[k].f1,
                  static_cast<long long>(per_class[k].support));
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-17s %9.3f %7.3f %9.3f %8lld\n", "Macro Avg",
                macro_precision, macro_recall, macro_f1,
                static_cast<long long>(total));
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-17s %9.3f %7.3f %9.3f %8lld\n", "Micro Avg",
                weighted_precision, weighted_recall, weighted_f1,
                static_cast<long long>(total));
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-17s %9.3f\n", "Accuracy", accuracy);
  out += buf;
  return out;
}

std::vector<ViewScore> rank_candidates(std::vector<ViewScore> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ViewScore& a, const ViewScore& b) {
                     if (a.macro_f1 != b.macro_f1) return a.macro_f1 > b.macro_f1;
                     // Broader stratification wins exact ties.
                     return static_cast<int>(a.scheme) > static_cast<int>(b.scheme);
                   });
  return candidates;
}

std::map<RoadClass, std::vector<ViewScore>> rank_views(
    const std::map<RoadClass, std::vector<ViewScore>>& candidates_by_class) {
  std::map<RoadClass, std::vector<ViewScore>> out;
  for (const auto& [rc, candidates] : candidates_by_class) {
    out[rc] = rank_candidates(candidates);
  }
  return out;
}

const char* iss_bin_name(IssBin b) {
  switch (b) {
    case IssBin::Minor: return "Minor";
    case IssBin::Moderate: return "Moderate";
    case IssBin::Severe: return "Severe";
    case IssBin::VerySevere: return "Very Severe";
  }
  return "?";
}

IssBin iss_classify(int iss) {
  if (iss < 1 || iss > 75) {
    throw DataError("ISS out of range [1, 75]: " + std::to_string(iss));
  }
  if (iss <= 8) return IssBin::Minor;
  if (iss <= 15) return IssBin::Moderate;
  if (iss <= 24) return IssBin::Severe;
  return IssBin::VerySevere;
}

IssValidation iss_validate(std::span<const IssRecord> records) {
  if (records.empty()) throw DataError("iss_validate: empty input");
  IssValidation v;
  std::array<double, kNumClasses> sums{};
  for (const auto& rec : records) {
    const int s = static_cast<int>(rec.predicted);
    const IssBin bin = iss_classify(rec.iss);
    ++v.counts[s][static_cast<int>(bin)];
    ++v.support[s];
    sums[s] += rec.iss;
  }
  bool all_present = true;
  for (int s = 0; s < kNumClasses; ++s) {
    if (v.support[s] > 0) {
      v.mean_iss[s] = sums[s] / static_cast<double>(v.support[s]);
    } else {
      all_present = false;
    }
  }
  v.monotonic = all_present;
  for (int s = 0; s + 1 < kNumClasses && v.monotonic; ++s) {
    if (!(v.mean_iss[s] > v.mean_iss[s + 1])) v.monotonic = false;
  }
  return v;
}

nlohmann::json IssValidation::to_json() const {
  nlohmann::json cross;
  for (int s = 0; s < kNumClasses; ++s) {
    nlohmann::json row;
    for (int b = 0; b < 4; ++b) {
      row[iss_bin_name(static_cast<IssBin>(b))] = counts[s][b];
    }
    cross[severity_name(static_cast<SeverityLabel>(s))] = row;
  }
  nlohmann::json means;
  for (int s = 0; s < kNumClasses; ++s) {
    means[severity_name(static_cast<SeverityLabel>(s))] = mean_iss[s];
  }
  return nlohmann::json{
      {"cross_tab", cross}, {"mean_iss", means}, {"monotonic", monotonic}};
}

std::string IssValidation::to_table() const {
  char buf[200];
  std::string out;
  out +=
      "Predicted         Very Severe    Severe  Moderate     Minor   Mean "
      "ISS\n";
  for (int s = 0; s < kNumClasses; ++s) {
    std::snprintf(
        buf, sizeof(buf), "%-17s %11lld %9lld %9lld %9lld %10.1f\n",
        severity_name(static_cast<SeverityLabel>(s)),
        static_cast<long long>(counts[s][static_cast<int>(IssBin::VerySevere)]),
        static_cast<long long>(counts[s][static_cast<int>(IssBin::Severe)]),
        static_cast<long long>(counts[s][static_cast<int>(IssBin::Moderate)]),
        static_cast<long long>(counts[s][static_cast<int>(IssBin::Minor)]),
        mean_iss[s]);
    out += buf;
  }
  out += monotonic ? "Mean ISS strictly decreases with predicted severity.\n"
                   : "Mean ISS is NOT strictly decreasing.\n";
  return out;
}

}  // namespace crashsev
