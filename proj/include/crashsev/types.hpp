#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace crashsev {

// Person-level injury outcome. The integer codes are ordinal, most severe
// first, and are relied on for tie-breaking (smaller code wins).
enum class SeverityLabel : int { Fatal = 0, Major = 1, Minor = 2, Possible = 3 };

inline constexpr int kNumClasses = 4;

const char* severity_name(SeverityLabel s);
std::optional<SeverityLabel> severity_from_code(int code);

// Roadway functional classes: R/U = rural/urban, 2L = two-lane, IP =
// interstate/principal arterial, MD/MU = multilane divided/undivided.
enum class RoadClass : int {
  R2L = 0,
  RIP = 1,
  RMD = 2,
  RMU = 3,
  U2L = 4,
  UIP = 5,
  UMD = 6,
  UMU = 7,
};

inline constexpr int kNumRoadClasses = 8;

const char* road_class_name(RoadClass rc);
std::optional<RoadClass> road_class_from_name(std::string_view name);

// Highway-inventory attributes attached to a crash by the linear-reference
// join.
struct SegmentAttributes {
  bool urban = false;
  std::string functional_class;
  int lanes = 0;
  bool median_divided = false;
  std::optional<double> speed_limit;
  std::optional<double> aadt;
};

struct CrashRecord {
  std::string record_id;
  std::string route_id;
  double milepoint = 0.0;
  SeverityLabel severity = SeverityLabel::Possible;
  int year = 0;
  std::string narrative;
  // Feature fields by name; a key absent from the map means the value is
  // missing. std::map keeps iteration deterministic.
  std::map<std::string, std::string> categorical;
  std::map<std::string, double> numeric;
  std::optional<SegmentAttributes> segment;
  std::optional<RoadClass> road_class;
};

struct RoadSegment {
  std::string route_id;
  double bmp = 0.0;  // begin milepoint, inclusive
  double emp = 0.0;  // end milepoint, exclusive
  bool urban = false;
  std::string functional_class;
  int lanes = 0;
  bool median_divided = false;
  std::optional<double> speed_limit;
  std::optional<double> aadt;
};

enum class ViewScheme : int { Group1 = 1, Group2 = 2, Group3 = 3 };

// One stratified slice of the corpus. record_ids index into the classified
// record vector the view was built from.
struct DatasetView {
  std::string view_id;
  std::string name;
  ViewScheme scheme = ViewScheme::Group1;
  std::set<RoadClass> members;
  std::vector<std::size_t> record_ids;
  bool trainable = true;
  std::string skip_reason;
};

}  // namespace crashsev
