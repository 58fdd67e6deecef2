#include "crashsev/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> parse_double(std::string_view raw) {
  const std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> parse_int(std::string_view raw) {
  const std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

int require_col(const CsvTable& table, const std::string& name,
                const char* which_file) {
  const int idx = table.find_col(name);
  if (idx < 0) {
    throw DataError(std::string("missing mapped column '") + name + "' in " +
                    which_file + " file");
  }
  return idx;
}

void note(ParseDiagnostics* diag, std::string msg) {
  if (diag && diag->messages.size() < 200) diag->messages.push_back(std::move(msg));
}

std::string cell(const std::vector<std::string>& row, int col) {
  return col >= 0 && col < static_cast<int>(row.size()) ? row[col] : std::string();
}

}  // namespace

std::vector<CrashRecord> parse_crash_table(const CsvTable& table,
                                           const SchemaConfig& schema,
                                           ParseDiagnostics* diag) {
  const int id_col = require_col(table, schema.crash_id_col, "crash");
  const int route_col = require_col(table, schema.route_col, "crash");
  const int mp_col = require_col(table, schema.milepoint_col, "crash");
  const int sev_col = require_col(table, schema.severity_col, "crash");
  const int narr_col = require_col(table, schema.narrative_col, "crash");
  const int year_col = require_col(table, schema.year_col, "crash");
  std::vector<int> cat_cols, num_cols;
  for (const auto& name : schema.categorical_cols) {
    cat_cols.push_back(require_col(table, name, "crash"));
  }
  for (const auto& name : schema.numeric_cols) {
    // Feature columns added by the join are allowed to be absent from raw
    // crash files; they arrive later.
    num_cols.push_back(table.find_col(name));
  }
  for (std::size_t i = 0; i < cat_cols.size(); ++i) {
    if (cat_cols[i] < 0) {
      throw DataError("missing mapped column '" + schema.categorical_cols[i] +
                      "' in crash file");
    }
  }

  std::vector<CrashRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string sev_text = trim(cell(row, sev_col));
    if (sev_text.empty()) {
      if (diag) ++diag->rows_dropped_blank_severity;
      continue;
    }
    const auto severity = schema.severity_from_label(sev_text);
    if (!severity) {
      if (diag) ++diag->rows_skipped_bad;
      note(diag, "crash row " + std::to_string(i + 2) +
                     ": unknown severity label '" + sev_text + "'");
      continue;
    }
    const auto mp = parse_double(cell(row, mp_col));
    if (!mp || *mp < 0.0) {
      if (diag) ++diag->rows_skipped_bad;
      note(diag, "crash row " + std::to_string(i + 2) + ": bad milepoint '" +
                     cell(row, mp_col) + "'");
      continue;
    }

    CrashRecord rec;
    rec.record_id = trim(cell(row, id_col));
    if (rec.record_id.empty()) rec.record_id = "row:" + std::to_string(i + 2);
    rec.route_id = trim(cell(row, route_col));
    rec.milepoint = *mp;
    rec.severity = *severity;
    rec.narrative = cell(row, narr_col);
    rec.year = parse_int(cell(row, year_col)).value_or(0);
    for (std::size_t f = 0; f < cat_cols.size(); ++f) {
      const std::string v = trim(cell(row, cat_cols[f]));
      if (!v.empty()) rec.categorical[schema.categorical_cols[f]] = v;
    }
    for (std::size_t f = 0; f < num_cols.size(); ++f) {
      if (num_cols[f] < 0) continue;
      const std::string raw = cell(row, num_cols[f]);
      const auto v = parse_double(raw);
      if (v) {
        rec.numeric[schema.numeric_cols[f]] = *v;
      } else if (!trim(raw).empty()) {
        note(diag, "crash row " + std::to_string(i + 2) + ": unparseable " +
                       schema.numeric_cols[f] + " '" + raw + "' treated as missing");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<CrashRecord> parse_crash_csv(const std::string& path,
                                         const SchemaConfig& schema,
                                         ParseDiagnostics* diag) {
  return parse_crash_table(read_csv(path), schema, diag);
}

std::vector<RoadSegment> parse_segments_table(const CsvTable& table,
                                              const SchemaConfig& schema,
                                              ParseDiagnostics* diag) {
  const int route_col = require_col(table, schema.seg_route_col, "segment");
  const int bmp_col = require_col(table, schema.seg_bmp_col, "segment");
  const int emp_col = require_col(table, schema.seg_emp_col, "segment");
  const int urban_col = require_col(table, schema.seg_urban_col, "segment");
  const int func_col = require_col(table, schema.seg_func_class_col, "segment");
  const int lanes_col = require_col(table, schema.seg_lanes_col, "segment");
  const int median_col = require_col(table, schema.seg_median_col, "segment");
  const int speed_col = table.find_col(schema.seg_speed_col);
  const int aadt_col = table.find_col(schema.seg_aadt_col);

  std::vector<RoadSegment> segments;
  segments.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    auto reject = [&](const std::string& why) {
      if (diag) ++diag->segments_rejected;
      note(diag, "segment row " + std::to_string(i + 2) + ": " + why);
    };
    RoadSegment seg;
    seg.route_id = trim(cell(row, route_col));
    if (seg.route_id.empty()) {
      reject("blank route id");
      continue;
    }
    const auto bmp = parse_double(cell(row, bmp_col));
    const auto emp = parse_double(cell(row, emp_col));
    if (!bmp || !emp) {
      reject("unparseable milepoint bounds");
      continue;
    }
    if (!(*bmp < *emp)) {
      reject("bmp " + cell(row, bmp_col) + " not below emp " + cell(row, emp_col));
      continue;
    }
    seg.bmp = *bmp;
    seg.emp = *emp;
    const auto urban = parse_flag(cell(row, urban_col), "urban", "rural");
    if (!urban) {
      reject("bad urban flag '" + cell(row, urban_col) + "'");
      continue;
    }
    seg.urban = *urban;
    seg.functional_class = trim(cell(row, func_col));
    if (seg.functional_class.empty()) {
      reject("blank functional class");
      continue;
    }
    const auto lanes = parse_int(cell(row, lanes_col));
    if (!lanes || *lanes < 1) {
      reject("bad lane count '" + cell(row, lanes_col) + "'");
      continue;
    }
    seg.lanes = *lanes;
    const auto median = parse_flag(cell(row, median_col), "divided", "undivided");
    if (!median) {
      reject("bad median flag '" + cell(row, median_col) + "'");
      continue;
    }
    seg.median_divided = *median;
    if (speed_col >= 0) seg.speed_limit = parse_double(cell(row, speed_col));
    if (aadt_col >= 0) seg.aadt = parse_double(cell(row, aadt_col));
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<RoadSegment> parse_segments_csv(const std::string& path,
                                            const SchemaConfig& schema,
                                            ParseDiagnostics* diag) {
  return parse_segments_table(read_csv(path), schema, diag);
}

std::vector<CrashRecord> linear_join(const std::vector<CrashRecord>& crashes,
                                     const std::vector<RoadSegment>& segments,
                                     const std::string& police_speed_field,
                                     JoinDiagnostics* diag) {
  // Per-route segment lists sorted by bmp. Overlap resolution: the crash
  // match scans for the smallest-bmp segment containing the milepoint, so an
  // overlapped stretch belongs to the earlier segment.
  std::unordered_map<std::string, std::vector<const RoadSegment*>> by_route;
  for (const auto& seg : segments) by_route[seg.route_id].push_back(&seg);
  for (auto& [route, list] : by_route) {
    std::sort(list.begin(), list.end(),
              [](const RoadSegment* a, const RoadSegment* b) {
                if (a->bmp != b->bmp) return a->bmp < b->bmp;
                return a->emp < b->emp;
              });
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      if (list[i + 1]->bmp < list[i]->emp && diag) {
        ++diag->overlapping_segment_pairs;
      }
    }
  }

  std::vector<CrashRecord> joined;
  joined.reserve(crashes.size());
  for (const auto& crash : crashes) {
    const auto it = by_route.find(crash.route_id);
    const RoadSegment* match = nullptr;
    if (it != by_route.end()) {
      const auto& list = it->second;
      // Last segment starting at or before the milepoint, then walk back to
      // the smallest-bmp segment that still contains it.
      auto pos = std::upper_bound(list.begin(), list.end(), crash.milepoint,
                                  [](double mp, const RoadSegment* s) {
                                    return mp < s->bmp;
                                  });
      while (pos != list.begin()) {
        --pos;
        if ((*pos)->emp > crash.milepoint) {
          match = *pos;
        } else if (match) {
          break;
        }
      }
    }
    if (!match) {
      if (diag) ++diag->unmatched;
      continue;
    }
    if (diag) ++diag->matched;

    CrashRecord rec = crash;
    rec.segment = SegmentAttributes{match->urban, match->functional_class,
                                    match->lanes, match->median_divided,
                                    match->speed_limit, match->aadt};

    auto merge_cat = [&](const char* field, const std::string& value) {
      auto [it2, inserted] = rec.categorical.emplace(field, value);
      if (!inserted && it2->second != value && diag) ++diag->attribute_conflicts;
    };
    auto merge_num = [&](const char* field, std::optional<double> value) {
      if (!value) return;
      auto [it2, inserted] = rec.numeric.emplace(field, *value);
      if (!inserted && it2->second != *value && diag) ++diag->attribute_conflicts;
    };
    merge_cat(kFieldUrban, match->urban ? "Urban" : "Rural");
    merge_cat(kFieldFunctionalClass, match->functional_class);
    merge_cat(kFieldMedian, match->median_divided ? "Divided" : "Undivided");
    merge_num(kFieldLanes, static_cast<double>(match->lanes));
    merge_num(kFieldAadt, match->aadt);

    // Speed limit: the police-reported value wins; disagreement with the
    // inventory value is counted but gates nothing.
    if (match->speed_limit) {
      const auto police = rec.numeric.find(police_speed_field);
      if (police == rec.numeric.end()) {
        rec.numeric[police_speed_field] = *match->speed_limit;
      } else if (police->second != *match->speed_limit && diag) {
        ++diag->speed_discrepancies;
      }
    }
    joined.push_back(std::move(rec));
  }
  return joined;
}

RoadClass classify_road(bool urban, const std::string& functional_class,
                        int lanes, bool median_divided,
                        const std::vector<std::string>& interstate_categories) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  const std::string fc = lower(trim(functional_class));
  for (const auto& cat : interstate_categories) {
    if (fc == lower(trim(cat))) return urban ? RoadClass::UIP : RoadClass::RIP;
  }
  if (lanes <= 2) return urban ? RoadClass::U2L : RoadClass::R2L;
  if (median_divided) return urban ? RoadClass::UMD : RoadClass::RMD;
  return urban ? RoadClass::UMU : RoadClass::RMU;
}

void assign_road_classes(std::vector<CrashRecord>& records,
                         const SchemaConfig& schema) {
  for (auto& rec : records) {
    if (!rec.segment) {
      throw DataError("record " + rec.record_id +
                      " has no segment attributes; run the join first");
    }
    rec.road_class = classify_road(rec.segment->urban,
                                   rec.segment->functional_class,
                                   rec.segment->lanes,
                                   rec.segment->median_divided,
                                   schema.interstate_categories);
  }
}

namespace {

const std::map<std::string, std::set<RoadClass>>& pair_definitions() {
  using RC = RoadClass;
  static const std::map<std::string, std::set<RoadClass>> pairs = {
      {"Urban", {RC::U2L, RC::UMD, RC::UMU, RC::UIP}},
      {"Rural", {RC::R2L, RC::RMD, RC::RMU, RC::RIP}},
      {"Freeway", {RC::UIP, RC::RIP}},
      {"Non-Freeway", {RC::R2L, RC::RMD, RC::RMU, RC::U2L, RC::UMD, RC::UMU}},
      {"Two-Lane", {RC::R2L, RC::U2L}},
      {"Multi-Lane", {RC::RIP, RC::RMD, RC::RMU, RC::UIP, RC::UMD, RC::UMU}},
      {"Divided", {RC::UMD, RC::RMD, RC::UIP, RC::RIP}},
      {"Undivided", {RC::R2L, RC::U2L, RC::RMU, RC::UMU}},
  };
  return pairs;
}

// Fixed emission order for the Group 2 views.
const std::vector<std::string>& pair_order() {
  static const std::vector<std::string> order = {
      "Urban", "Rural", "Freeway", "Non-Freeway",
      "Two-Lane", "Multi-Lane", "Divided", "Undivided"};
  return order;
}

}  // namespace

std::vector<DatasetView> build_dataset_views(
    const std::vector<CrashRecord>& records) {
  for (const auto& rec : records) {
    if (!rec.road_class) {
      throw DataError("record " + rec.record_id + " has no road class");
    }
  }
  std::vector<DatasetView> views;
  views.reserve(17);
  for (int i = 0; i < kNumRoadClasses; ++i) {
    const auto rc = static_cast<RoadClass>(i);
    DatasetView v;
    v.view_id = std::string("g1:") + road_class_name(rc);
    v.name = road_class_name(rc);
    v.scheme = ViewScheme::Group1;
    v.members = {rc};
    views.push_back(std::move(v));
  }
  for (const auto& name : pair_order()) {
    DatasetView v;
    v.view_id = "g2:" + name;
    v.name = name;
    v.scheme = ViewScheme::Group2;
    v.members = pair_definitions().at(name);
    views.push_back(std::move(v));
  }
  {
    DatasetView v;
    v.view_id = "g3:All";
    v.name = "All";
    v.scheme = ViewScheme::Group3;
    for (int i = 0; i < kNumRoadClasses; ++i) {
      v.members.insert(static_cast<RoadClass>(i));
    }
    views.push_back(std::move(v));
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    const RoadClass rc = *records[r].road_class;
    for (auto& v : views) {
      if (v.members.count(rc)) v.record_ids.push_back(r);
    }
  }
  return views;
}

std::vector<std::string> covering_view_ids(RoadClass rc) {
  std::vector<std::string> ids;
  ids.push_back(std::string("g1:") + road_class_name(rc));
  for (const auto& name : pair_order()) {
    if (pair_definitions().at(name).count(rc)) ids.push_back("g2:" + name);
  }
  ids.push_back("g3:All");
  return ids;
}

void write_joined_csv(const std::string& path,
                      const std::vector<CrashRecord>& records,
                      const SchemaConfig& schema) {
  CsvTable table;
  table.header = {schema.crash_id_col, schema.route_col, schema.milepoint_col,
                  schema.year_col, schema.severity_col, "road_class"};
  for (const auto& c : schema.categorical_cols) table.header.push_back(c);
  for (const auto& c : schema.numeric_cols) table.header.push_back(c);
  table.header.push_back(schema.narrative_col);

  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& rec : records) {
    std::vector<std::string> row;
    row.push_back(rec.record_id);
    row.push_back(rec.route_id);
    row.push_back(fmt(rec.milepoint));
    row.push_back(std::to_string(rec.year));
    row.push_back(severity_name(rec.severity));
    row.push_back(rec.road_class ? road_class_name(*rec.road_class) : "");
    for (const auto& c : schema.categorical_cols) {
      const auto it = rec.categorical.find(c);
      row.push_back(it == rec.categorical.end() ? "" : it->second);
    }
    for (const auto& c : schema.numeric_cols) {
      const auto it = rec.numeric.find(c);
      row.push_back(it == rec.numeric.end() ? "" : fmt(it->second));
    }
    row.push_back(rec.narrative);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

std::vector<CrashRecord> load_joined_csv(const std::string& path,
                                         const SchemaConfig& schema) {
  const CsvTable table = read_csv(path);
  if (table.find_col("road_class") < 0) {
    throw DataError("no road_class column in " + path +
                    "; this file is not an ingest output");
  }
  ParseDiagnostics diag;
  auto records = parse_crash_table(table, schema, &diag);
  if (diag.rows_skipped_bad > 0) {
    throw DataError("joined file " + path + " has " +
                    std::to_string(diag.rows_skipped_bad) + " malformed rows");
  }
  const int rc_col = table.find_col("road_class");
  // parse_crash_table drops blank-severity rows; walk the table in parallel
  // to attach road classes to the surviving records.
  std::size_t out = 0;
  for (std::size_t i = 0; i < table.rows.size() && out < records.size(); ++i) {
    const auto& row = table.rows[i];
    const int sev_col = table.find_col(schema.severity_col);
    if (trim(cell(row, sev_col)).empty()) continue;
    const auto rc = road_class_from_name(trim(cell(row, rc_col)));
    if (!rc) {
      throw DataError("bad road_class value in " + path + " row " +
                      std::to_string(i + 2));
    }
    records[out].road_class = rc;
    ++out;
  }
  return records;
}

}  // namespace crashsev
