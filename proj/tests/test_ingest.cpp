#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/ingest.hpp"
#include "crashsev/schema.hpp"

using namespace crashsev;

namespace {

CrashRecord crash(const std::string& id, const std::string& route, double mp,
                  SeverityLabel sev = SeverityLabel::Possible) {
  CrashRecord r;
  r.record_id = id;
  r.route_id = route;
  r.milepoint = mp;
  r.severity = sev;
  r.year = 2020;
  return r;
}

RoadSegment segment(const std::string& route, double bmp, double emp,
                    bool urban = false,
                    const std::string& func = "Minor Arterial", int lanes = 2,
                    bool divided = false) {
  RoadSegment s;
  s.route_id = route;
  s.bmp = bmp;
  s.emp = emp;
  s.urban = urban;
  s.functional_class = func;
  s.lanes = lanes;
  s.median_divided = divided;
  return s;
}

}  // namespace

TEST_CASE("milepoint matching is half-open begin-inclusive") {
  const std::vector<RoadSegment> segs = {segment("KY-1", 0.0, 1.0),
                                         segment("KY-1", 1.0, 2.0)};
  const std::vector<CrashRecord> crashes = {
      crash("at-begin", "KY-1", 1.0), crash("inside", "KY-1", 0.5),
      crash("at-end", "KY-1", 2.0), crash("off-route", "KY-9", 0.5)};
  JoinDiagnostics diag;
  const auto joined = linear_join(crashes, segs, "speed_limit", &diag);
  REQUIRE(joined.size() == 2);
  CHECK(joined[0].record_id == "at-begin");
  CHECK(joined[0].segment->functional_class == "Minor Arterial");
  CHECK(joined[1].record_id == "inside");
  CHECK(diag.matched == 2);
  CHECK(diag.unmatched == 2);
}

TEST_CASE("overlapping segments resolve to the smallest begin milepoint") {
  const std::vector<RoadSegment> segs = {
      segment("KY-1", 0.0, 5.0, false, "A", 2),
      segment("KY-1", 2.0, 3.0, false, "B", 4)};
  const std::vector<CrashRecord> crashes = {crash("x", "KY-1", 2.5)};
  JoinDiagnostics diag;
  const auto joined = linear_join(crashes, segs, "speed_limit", &diag);
  REQUIRE(joined.size() == 1);
  CHECK(joined[0].segment->functional_class == "A");
  CHECK(diag.overlapping_segment_pairs == 1);
}

TEST_CASE("police-reported speed wins over the inventory value") {
  auto seg = segment("KY-1", 0.0, 1.0);
  seg.speed_limit = 55.0;
  auto with_conflict = crash("a", "KY-1", 0.5);
  with_conflict.numeric["speed_limit"] = 45.0;
  auto without = crash("b", "KY-1", 0.5);

  JoinDiagnostics diag;
  const auto joined =
      linear_join({with_conflict, without}, {seg}, "speed_limit", &diag);
  REQUIRE(joined.size() == 2);
  CHECK(joined[0].numeric.at("speed_limit") == 45.0);  // crash file kept
  CHECK(joined[1].numeric.at("speed_limit") == 55.0);  // filled from inventory
  CHECK(diag.speed_discrepancies == 1);

  // Re-joining the already-joined records changes nothing and counts no new
  // discrepancies beyond the same original one.
  JoinDiagnostics diag2;
  const auto rejoined = linear_join(joined, {seg}, "speed_limit", &diag2);
  CHECK(rejoined[0].numeric.at("speed_limit") == 45.0);
  CHECK(rejoined[1].numeric.at("speed_limit") == 55.0);
  CHECK(diag2.speed_discrepancies == 1);
}

TEST_CASE("road classification covers all eight branches") {
  const std::vector<std::string> interstates = {"Interstate",
                                                "Principal Arterial"};
  CHECK(classify_road(false, "Interstate", 4, true, interstates) == RoadClass::RIP);
  CHECK(classify_road(true, "interstate", 4, true, interstates) == RoadClass::UIP);
  // Case-insensitive, whitespace-tolerant match.
  CHECK(classify_road(true, "  PRINCIPAL ARTERIAL ", 6, false, interstates) ==
        RoadClass::UIP);
  CHECK(classify_road(false, "Local", 2, false, interstates) == RoadClass::R2L);
  CHECK(classify_road(true, "Local", 1, false, interstates) == RoadClass::U2L);
  CHECK(classify_road(false, "Minor Arterial", 4, true, interstates) ==
        RoadClass::RMD);
  CHECK(classify_road(false, "Minor Arterial", 4, false, interstates) ==
        RoadClass::RMU);
  CHECK(classify_road(true, "Minor Arterial", 3, true, interstates) ==
        RoadClass::UMD);
  CHECK(classify_road(true, "Minor Arterial", 5, false, interstates) ==
        RoadClass::UMU);
}

TEST_CASE("records without a joined segment cannot be classified") {
  std::vector<CrashRecord> records = {crash("a", "KY-1", 0.5)};
  CHECK_THROWS_AS(assign_road_classes(records, SchemaConfig{}), DataError);
}

namespace {

std::vector<CrashRecord> classified_corpus() {
  // Two records per road class so every view has members.
  std::vector<CrashRecord> records;
  for (int rc = 0; rc < kNumRoadClasses; ++rc) {
    for (int i = 0; i < 2; ++i) {
      auto r = crash("id" + std::to_string(rc) + "_" + std::to_string(i),
                     "R" + std::to_string(rc), 0.5,
                     static_cast<SeverityLabel>(i % kNumClasses));
      r.road_class = static_cast<RoadClass>(rc);
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace

TEST_CASE("seventeen views partition by class, pair, and whole corpus") {
  const auto records = classified_corpus();
  const auto views = build_dataset_views(records);
  REQUIRE(views.size() == 17);

  int g1 = 0, g2 = 0, g3 = 0;
  for (const auto& v : views) {
    switch (v.scheme) {
      case ViewScheme::Group1: ++g1; break;
      case ViewScheme::Group2: ++g2; break;
      case ViewScheme::Group3: ++g3; break;
    }
  }
  CHECK(g1 == 8);
  CHECK(g2 == 8);
  CHECK(g3 == 1);

  // Every record appears in exactly six views: its class view, four pair
  // views, and the whole corpus.
  std::map<std::size_t, int> appearances;
  for (const auto& v : views) {
    for (const std::size_t r : v.record_ids) ++appearances[r];
  }
  REQUIRE(appearances.size() == records.size());
  for (const auto& [r, n] : appearances) CHECK(n == 6);

  // Complementary pairs cover the corpus without overlap.
  auto members_of = [&](const std::string& id) {
    for (const auto& v : views) {
      if (v.view_id == id) return v.record_ids;
    }
    FAIL(("missing view " + id));
    return std::vector<std::size_t>{};
  };
  for (const auto& [a, b] :
       std::vector<std::pair<std::string, std::string>>{
           {"g2:Urban", "g2:Rural"},
           {"g2:Freeway", "g2:Non-Freeway"},
           {"g2:Two-Lane", "g2:Multi-Lane"},
           {"g2:Divided", "g2:Undivided"}}) {
    const auto ra = members_of(a);
    const auto rb = members_of(b);
    std::set<std::size_t> together(ra.begin(), ra.end());
    for (const std::size_t r : rb) CHECK(together.insert(r).second);
    CHECK(together.size() == records.size());
  }
}

TEST_CASE("covering views for a road class come back in scheme order") {
  const auto ids = covering_view_ids(RoadClass::U2L);
  REQUIRE(ids.size() == 6);
  CHECK(ids[0] == "g1:U2L");
  CHECK(ids[1] == "g2:Urban");
  CHECK(ids[2] == "g2:Non-Freeway");
  CHECK(ids[3] == "g2:Two-Lane");
  CHECK(ids[4] == "g2:Undivided");
  CHECK(ids[5] == "g3:All");
}

TEST_CASE("joined dataset survives a CSV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "crashsev_ingest_rt";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "joined.csv").string();

  SchemaConfig schema;
  schema.categorical_cols = {"light_condition"};
  schema.numeric_cols = {"age", "speed_limit"};

  auto a = crash("a", "KY-1", 0.25, SeverityLabel::Fatal);
  a.road_class = RoadClass::R2L;
  a.categorical["light_condition"] = "Dark, No Lights";
  a.numeric["age"] = 33.0;
  a.narrative = "ran off, road \"quoted\"\nsecond line";
  auto b = crash("b", "KY-1", 0.75, SeverityLabel::Minor);
  b.road_class = RoadClass::UMU;
  b.numeric["speed_limit"] = 55.0;

  write_joined_csv(path, {a, b}, schema);
  const auto back = load_joined_csv(path, schema);
  REQUIRE(back.size() == 2);
  CHECK(back[0].record_id == "a");
  CHECK(back[0].severity == SeverityLabel::Fatal);
  CHECK(back[0].road_class == RoadClass::R2L);
  CHECK(back[0].categorical.at("light_condition") == "Dark, No Lights");
  CHECK(back[0].numeric.at("age") == 33.0);
  CHECK(back[0].narrative == a.narrative);
  CHECK(back[1].numeric.count("age") == 0);
  CHECK(back[1].road_class == RoadClass::UMU);
}

TEST_CASE("parser drops blank severities and reports bad rows") {
  SchemaConfig schema;
  schema.numeric_cols = {"age"};
  CsvTable t;
  t.header = {"record_id", "route_id", "milepoint", "severity", "year",
              "narrative", "age"};
  t.rows = {
      {"1", "KY-1", "0.5", "Fatal", "2020", "hit tree", "40"},
      {"2", "KY-1", "0.6", "", "2020", "no severity recorded", "31"},
      {"3", "KY-1", "not-a-number", "Fatal", "2020", "bad milepoint", "22"},
      {"4", "KY-1", "0.7", "Banana", "2020", "unknown label", "50"},
      {"5", "KY-1", "0.8", "Minor Injury", "2020", "fine", "junk"},
  };
  ParseDiagnostics diag;
  const auto records = parse_crash_table(t, schema, &diag);
  REQUIRE(records.size() == 2);  // rows 1 and 5 survive
  CHECK(diag.rows_dropped_blank_severity == 1);
  CHECK(diag.rows_skipped_bad == 2);
  CHECK(records[1].numeric.count("age") == 0);  // unparseable number = missing
  CHECK(diag.messages.size() >= 3);
}

TEST_CASE("segment parser rejects malformed inventory rows") {
  SchemaConfig schema;
  CsvTable t;
  t.header = {"route_id", "bmp", "emp", "urban", "functional_class",
              "lanes", "median_divided", "speed_limit", "aadt"};
  t.rows = {
      {"KY-1", "0", "1", "urban", "Local", "2", "undivided", "55", "1000"},
      {"", "0", "1", "urban", "Local", "2", "undivided", "", ""},
      {"KY-1", "2", "1", "urban", "Local", "2", "undivided", "", ""},
      {"KY-1", "0", "1", "sideways", "Local", "2", "undivided", "", ""},
      {"KY-1", "0", "1", "rural", "Local", "0", "divided", "", ""},
  };
  ParseDiagnostics diag;
  const auto segs = parse_segments_table(t, schema, &diag);
  REQUIRE(segs.size() == 1);
  CHECK(diag.segments_rejected == 4);
}
