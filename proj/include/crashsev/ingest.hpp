#pragma once

// Crash/segment parsing, the linear-reference join, road classification, and
// construction of the 17 roadway-stratified dataset views.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crashsev/csv.hpp"
#include "crashsev/schema.hpp"
#include "crashsev/types.hpp"

namespace crashsev {

struct ParseDiagnostics {
  std::size_t rows_dropped_blank_severity = 0;
  std::size_t rows_skipped_bad = 0;
  std::size_t segments_rejected = 0;
  std::vector<std::string> messages;
};

std::vector<CrashRecord> parse_crash_table(const CsvTable& table,
                                           const SchemaConfig& schema,
                                           ParseDiagnostics* diag = nullptr);
std::vector<CrashRecord> parse_crash_csv(const std::string& path,
                                         const SchemaConfig& schema,
                                         ParseDiagnostics* diag = nullptr);

std::vector<RoadSegment> parse_segments_table(const CsvTable& table,
                                              const SchemaConfig& schema,
                                              ParseDiagnostics* diag = nullptr);
std::vector<RoadSegment> parse_segments_csv(const std::string& path,
                                            const SchemaConfig& schema,
                                            ParseDiagnostics* diag = nullptr);

struct JoinDiagnostics {
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t speed_discrepancies = 0;
  std::size_t attribute_conflicts = 0;
  std::size_t overlapping_segment_pairs = 0;
};

// Matches each crash to the segment on its route whose [bmp, emp) interval
// contains the milepoint; with overlapping segments the smaller bmp wins.
// Matched records gain the inventory attributes both as typed fields and as
// feature map entries; unmatched records are excluded. Crash-file values win
// any conflict with inventory values (differences are counted), so the
// operation is idempotent.
std::vector<CrashRecord> linear_join(const std::vector<CrashRecord>& crashes,
                                     const std::vector<RoadSegment>& segments,
                                     const std::string& police_speed_field,
                                     JoinDiagnostics* diag = nullptr);

RoadClass classify_road(bool urban, const std::string& functional_class,
                        int lanes, bool median_divided,
                        const std::vector<std::string>& interstate_categories);

// Classifies every joined record in place. Records without segment
// attributes are an error.
void assign_road_classes(std::vector<CrashRecord>& records,
                         const SchemaConfig& schema);

// The 17 views: one per road class (Group 1), four complementary pairs
// (Group 2), and the full corpus (Group 3). Every record lands in exactly
// six views. Requires road_class on every record.
std::vector<DatasetView> build_dataset_views(
    const std::vector<CrashRecord>& records);

// The six views covering one road class, in Group1, Group2-pair, Group3
// order. Useful for ranking candidates.
std::vector<std::string> covering_view_ids(RoadClass rc);

// Joined-dataset persistence (output of `ingest`, input of `run-matrix`).
void write_joined_csv(const std::string& path,
                      const std::vector<CrashRecord>& records,
                      const SchemaConfig& schema);
std::vector<CrashRecord> load_joined_csv(const std::string& path,
                                         const SchemaConfig& schema);

}  // namespace crashsev
