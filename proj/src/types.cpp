#include "crashsev/types.hpp"

namespace crashsev {

const char* severity_name(SeverityLabel s) {
  switch (s) {
    case SeverityLabel::Fatal: return "Fatal";
    case SeverityLabel::Major: return "Major Injury";
    case SeverityLabel::Minor: return "Minor Injury";
    case SeverityLabel::Possible: return "Possible Injury";
  }
  return "?";
}

std::optional<SeverityLabel> severity_from_code(int code) {
  if (code < 0 || code >= kNumClasses) return std::nullopt;
  return static_cast<SeverityLabel>(code);
}

const char* road_class_name(RoadClass rc) {
  switch (rc) {
    case RoadClass::R2L: return "R2L";
    case RoadClass::RIP: return "RIP";
    case RoadClass::RMD: return "RMD";
    case RoadClass::RMU: return "RMU";
    case RoadClass::U2L: return "U2L";
    case RoadClass::UIP: return "UIP";
    case RoadClass::UMD: return "UMD";
    case RoadClass::UMU: return "UMU";
  }
  return "?";
}

std::optional<RoadClass> road_class_from_name(std::string_view name) {
  for (int i = 0; i < kNumRoadClasses; ++i) {
    const auto rc = static_cast<RoadClass>(i);
    if (name == road_class_name(rc)) return rc;
  }
  return std::nullopt;
}

}  // namespace crashsev
