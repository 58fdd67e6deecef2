#pragma once

// Synthetic corpus generator: routed road segments covering all eight road
// classes, class-conditional structured features, keyword-bearing narratives
// with tunable signal strength, and optional injury-score records.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashsev/eval.hpp"
#include "crashsev/schema.hpp"
#include "crashsev/types.hpp"

namespace crashsev {

struct SynthParams {
  std::size_t n_records = 5000;
  std::array<double, kNumClasses> priors = {0.03, 0.10, 0.39, 0.48};
  // Probability that a narrative embeds keywords of its true class; 0 makes
  // narratives pure noise.
  double narrative_signal_strength = 0.8;
  std::array<std::vector<std::string>, kNumClasses> class_keywords =
      default_class_keywords();
  std::vector<std::string> noise_vocab = default_noise_vocab();
  double structured_missing_rate = 0.03;
  // Fraction of ems_response_min cells left missing; above the cleaning
  // threshold by default so the column exercises the drop rule.
  double junk_missing_rate = 0.7;
  bool with_iss = true;
  std::array<double, kNumClasses> iss_means = {23.0, 17.0, 11.7, 10.6};
  double iss_stddev = 3.0;
  int year_min = 2019;
  int year_max = 2023;
  std::array<double, kNumRoadClasses> road_class_weights = {1, 1, 1, 1,
                                                            1, 1, 1, 1};

  static std::array<std::vector<std::string>, kNumClasses> default_class_keywords();
  static std::vector<std::string> default_noise_vocab();

  nlohmann::json to_json() const;
  static SynthParams from_json(const nlohmann::json& j);
};

struct SynthData {
  std::vector<CrashRecord> records;   // no road_class yet; join assigns it
  std::vector<RoadSegment> segments;
  std::vector<int> iss;               // aligned with records; empty if disabled
};

SynthData generate_synthetic(const SynthParams& params, std::uint64_t seed);

// Field lists matching what generate_synthetic emits.
SchemaConfig synth_schema();

}  // namespace crashsev
