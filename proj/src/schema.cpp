#include "crashsev/schema.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void get_if_present(const nlohmann::json& j, const char* key, std::string& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

void get_if_present(const nlohmann::json& j, const char* key,
                    std::vector<std::string>& out) {
  if (j.contains(key)) out = j.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::map<std::string, int> SchemaConfig::default_severity_labels() {
  return {
      {"Fatal", 0},           {"K", 0},
      {"Serious Injury", 1},  {"Major Injury", 1},  {"A", 1},
      {"Minor Injury", 2},    {"B", 2},
      {"Possible Injury", 3}, {"C", 3},
  };
}

std::optional<SeverityLabel> SchemaConfig::severity_from_label(
    std::string_view label) const {
  const auto it = severity_labels.find(trim(label));
  if (it == severity_labels.end()) return std::nullopt;
  return severity_from_code(it->second);
}

nlohmann::json SchemaConfig::to_json() const {
  nlohmann::json crash{
      {"record_id", crash_id_col},   {"route_id", route_col},
      {"milepoint", milepoint_col},  {"severity", severity_col},
      {"narrative", narrative_col},  {"year", year_col},
      {"categorical", categorical_cols}, {"numeric", numeric_cols},
  };
  nlohmann::json segments{
      {"route_id", seg_route_col}, {"bmp", seg_bmp_col},
      {"emp", seg_emp_col},        {"urban", seg_urban_col},
      {"functional_class", seg_func_class_col},
      {"lanes", seg_lanes_col},    {"median_divided", seg_median_col},
      {"speed_limit", seg_speed_col}, {"aadt", seg_aadt_col},
  };
  return nlohmann::json{
      {"crash", crash},
      {"segments", segments},
      {"severity_labels", severity_labels},
      {"interstate_categories", interstate_categories},
      {"police_speed_field", police_speed_field},
  };
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& j) {
  SchemaConfig s;
  if (j.contains("crash")) {
    const auto& c = j.at("crash");
    get_if_present(c, "record_id", s.crash_id_col);
    get_if_present(c, "route_id", s.route_col);
    get_if_present(c, "milepoint", s.milepoint_col);
    get_if_present(c, "severity", s.severity_col);
    get_if_present(c, "narrative", s.narrative_col);
    get_if_present(c, "year", s.year_col);
    get_if_present(c, "categorical", s.categorical_cols);
    get_if_present(c, "numeric", s.numeric_cols);
  }
  if (j.contains("segments")) {
    const auto& g = j.at("segments");
    get_if_present(g, "route_id", s.seg_route_col);
    get_if_present(g, "bmp", s.seg_bmp_col);
    get_if_present(g, "emp", s.seg_emp_col);
    get_if_present(g, "urban", s.seg_urban_col);
    get_if_present(g, "functional_class", s.seg_func_class_col);
    get_if_present(g, "lanes", s.seg_lanes_col);
    get_if_present(g, "median_divided", s.seg_median_col);
    get_if_present(g, "speed_limit", s.seg_speed_col);
    get_if_present(g, "aadt", s.seg_aadt_col);
  }
  if (j.contains("severity_labels")) {
    s.severity_labels =
        j.at("severity_labels").get<std::map<std::string, int>>();
    for (const auto& [label, code] : s.severity_labels) {
      if (code < 0 || code >= kNumClasses) {
        throw DataError("severity label '" + label + "' maps to bad code " +
                        std::to_string(code));
      }
    }
  }
  get_if_present(j, "interstate_categories", s.interstate_categories);
  get_if_present(j, "police_speed_field", s.police_speed_field);
  return s;
}

SchemaConfig SchemaConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed schema JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

void SchemaConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema file: " + path);
  out << to_json().dump(2) << '\n';
}

SchemaConfig augment_schema_for_join(const SchemaConfig& schema) {
  SchemaConfig out = schema;
  auto add_unique = [](std::vector<std::string>& v, const std::string& name) {
    if (std::find(v.begin(), v.end(), name) == v.end()) v.push_back(name);
  };
  add_unique(out.categorical_cols, kFieldUrban);
  add_unique(out.categorical_cols, kFieldFunctionalClass);
  add_unique(out.categorical_cols, kFieldMedian);
  add_unique(out.numeric_cols, kFieldLanes);
  add_unique(out.numeric_cols, kFieldAadt);
  add_unique(out.numeric_cols, out.police_speed_field);
  return out;
}

std::optional<bool> parse_flag(std::string_view text, std::string_view true_word,
                               std::string_view false_word) {
  const std::string t = lower(trim(text));
  if (t.empty()) return std::nullopt;
  if (t == lower(true_word) || t == "1" || t == "true" || t == "yes" ||
      t == "y" || t == "t") {
    return true;
  }
  if (t == lower(false_word) || t == "0" || t == "false" || t == "no" ||
      t == "n" || t == "f") {
    return false;
  }
  return std::nullopt;
}

}  // namespace crashsev
