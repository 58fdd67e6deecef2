#pragma once

// Column-mapping configuration: which CSV columns hold ids, location,
// severity, narrative, and which fields become model features. Serialized as
// JSON so a data directory is self-describing.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashsev/types.hpp"

namespace crashsev {

struct SchemaConfig {
  // Crash-file column names.
  std::string crash_id_col = "record_id";
  std::string route_col = "route_id";
  std::string milepoint_col = "milepoint";
  std::string severity_col = "severity";
  std::string narrative_col = "narrative";
  std::string year_col = "year";
  std::vector<std::string> categorical_cols;
  std::vector<std::string> numeric_cols;

  // Severity label string -> class code. Defaults accept both long and short
  // label spellings.
  std::map<std::string, int> severity_labels = default_severity_labels();

  // Segment-file column names.
  std::string seg_route_col = "route_id";
  std::string seg_bmp_col = "bmp";
  std::string seg_emp_col = "emp";
  std::string seg_urban_col = "urban";
  std::string seg_func_class_col = "functional_class";
  std::string seg_lanes_col = "lanes";
  std::string seg_median_col = "median_divided";
  std::string seg_speed_col = "speed_limit";
  std::string seg_aadt_col = "aadt";

  // Functional-class values routed to the interstate/principal-arterial
  // branch of road classification. Matched case-insensitively.
  std::vector<std::string> interstate_categories = {"Interstate",
                                                    "Principal Arterial"};

  // Crash-file field holding the police-reported speed limit. On conflict
  // with the inventory value, this one is kept.
  std::string police_speed_field = "speed_limit";

  static std::map<std::string, int> default_severity_labels();

  std::optional<SeverityLabel> severity_from_label(std::string_view label) const;

  nlohmann::json to_json() const;
  static SchemaConfig from_json(const nlohmann::json& j);
  static SchemaConfig load(const std::string& path);
  void save(const std::string& path) const;
};

// Field names the linear-reference join merges into crash records.
inline constexpr const char* kFieldUrban = "his_urban";
inline constexpr const char* kFieldFunctionalClass = "his_functional_class";
inline constexpr const char* kFieldLanes = "his_lanes";
inline constexpr const char* kFieldMedian = "his_median";
inline constexpr const char* kFieldAadt = "his_aadt";

// Adds the merged inventory fields (and the police speed field) to the
// feature lists so they survive into the encoded matrix.
SchemaConfig augment_schema_for_join(const SchemaConfig& schema);

// "urban"/"1"/"true"/"yes" style flags, case-insensitive; nullopt when the
// text parses as neither true nor false.
std::optional<bool> parse_flag(std::string_view text, std::string_view true_word,
                               std::string_view false_word);

}  // namespace crashsev
