#pragma once

// Multiclass evaluation (per-class one-vs-rest precision/recall/F1, macro and
// support-weighted aggregates, accuracy), dataset-view ranking, and clinical
// validation against Injury Severity Scores.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashsev/types.hpp"

namespace crashsev {

struct ConfusionMatrix {
  // counts[true][pred]
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  static ConfusionMatrix from(std::span<const int> y_true,
                              std::span<const int> y_pred);
  std::int64_t total() const;
  std::int64_t trace() const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvalReport {
  std::string config_id;
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  // Support-weighted aggregates, reported under the "Micro Avg" heading the
  // result tables use.
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::int64_t total = 0;
  ConfusionMatrix confusion;
  // Classes predicted never despite nonzero support (their precision is 0).
  int zero_predicted_classes = 0;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::vector<std::vector<std::int64_t>> confusion_rows_json() const;
  // Fixed-layout text block: one row per class plus Macro Avg, Micro Avg and
  // Accuracy rows.
  std::string to_table() const;
};

// Macro averages cover only classes present in y_true.
EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred);

double macro_average(std::span<const double> values);
double weighted_average(std::span<const double> values,
                        std::span<const std::int64_t> supports);

struct ViewScore {
  std::string view_name;
  ViewScheme scheme = ViewScheme::Group1;
  double macro_f1 = 0.0;
};

// Score-descending; exact ties prefer broader context (Group 3 over Group 2
// over Group 1), remaining ties keep candidate order.
std::vector<ViewScore> rank_candidates(std::vector<ViewScore> candidates);
std::map<RoadClass, std::vector<ViewScore>> rank_views(
    const std::map<RoadClass, std::vector<ViewScore>>& candidates_by_class);

// Injury Severity Score bins.
enum class IssBin : int { Minor = 0, Moderate = 1, Severe = 2, VerySevere = 3 };

const char* iss_bin_name(IssBin b);

// 1-8 Minor, 9-15 Moderate, 16-24 Severe, 25-75 Very Severe. Outside [1, 75]
// is an error.
IssBin iss_classify(int iss);

struct IssRecord {
  SeverityLabel predicted = SeverityLabel::Possible;
  int iss = 0;
};

struct IssValidation {
  // counts[severity][bin]
  std::array<std::array<std::int64_t, 4>, kNumClasses> counts{};
  std::array<double, kNumClasses> mean_iss{};
  std::array<std::int64_t, kNumClasses> support{};
  // True when every severity level is populated and mean ISS strictly
  // decreases from Fatal to Possible.
  bool monotonic = false;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

IssValidation iss_validate(std::span<const IssRecord> records);

}  // namespace crashsev
