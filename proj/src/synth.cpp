#include "crashsev/synth.hpp"

#include <algorithm>
#include <cmath>

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

namespace {

struct ClassProfile {
  RoadClass rc;
  bool urban;
  const char* functional_class;
  int lanes;
  bool divided;
  double speed_base;
};

// One route per road class; attributes satisfy the classification rules.
// "Principal Arterial" is deliberately absent from the non-interstate rows:
// it routes to the interstate branch.
const std::array<ClassProfile, kNumRoadClasses>& profiles() {
  static const std::array<ClassProfile, kNumRoadClasses> p = {{
      {RoadClass::R2L, false, "Major Collector", 2, false, 45.0},
      {RoadClass::RIP, false, "Interstate", 4, true, 70.0},
      {RoadClass::RMD, false, "Minor Arterial", 4, true, 55.0},
      {RoadClass::RMU, false, "Major Collector", 3, false, 55.0},
      {RoadClass::U2L, true, "Minor Arterial", 2, false, 35.0},
      {RoadClass::UIP, true, "Interstate", 4, true, 65.0},
      {RoadClass::UMD, true, "Minor Arterial", 4, true, 45.0},
      {RoadClass::UMU, true, "Major Collector", 3, false, 45.0},
  }};
  return p;
}

constexpr double kRouteMiles = 50.0;

std::string route_of(RoadClass rc) {
  return std::string("RT-") + road_class_name(rc);
}

// Category tables: one weight row per severity class, most-severe first.
struct CategoricalField {
  const char* name;
  std::vector<const char*> values;
  std::array<std::vector<double>, kNumClasses> weights;
};

const std::vector<CategoricalField>& categorical_fields() {
  static const std::vector<CategoricalField> fields = {
      {"restraint_use",
       {"None", "Lap Belt", "Shoulder And Lap"},
       {{{0.55, 0.15, 0.30}, {0.35, 0.20, 0.45}, {0.12, 0.18, 0.70}, {0.06, 0.14, 0.80}}}},
      {"airbag_deployed",
       {"Deployed", "Not Deployed"},
       {{{0.85, 0.15}, {0.70, 0.30}, {0.35, 0.65}, {0.20, 0.80}}}},
      {"ejection",
       {"Ejected", "Not Ejected"},
       {{{0.40, 0.60}, {0.15, 0.85}, {0.02, 0.98}, {0.01, 0.99}}}},
      {"manner_of_collision",
       {"Head On", "Angle", "Rear End", "Sideswipe", "Single Vehicle"},
       {{{0.30, 0.20, 0.05, 0.05, 0.40},
         {0.20, 0.25, 0.15, 0.10, 0.30},
         {0.08, 0.27, 0.30, 0.15, 0.20},
         {0.05, 0.25, 0.40, 0.15, 0.15}}}},
      {"light_condition",
       {"Daylight", "Dark - Lighted", "Dark - Not Lighted"},
       {{{0.40, 0.20, 0.40}, {0.50, 0.20, 0.30}, {0.62, 0.18, 0.20}, {0.68, 0.17, 0.15}}}},
      {"road_condition",
       {"Dry", "Wet", "Icy"},
       {{{0.60, 0.28, 0.12}, {0.65, 0.25, 0.10}, {0.72, 0.21, 0.07}, {0.75, 0.19, 0.06}}}},
  };
  return fields;
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cum;
  cum.reserve(w.size());
  double acc = 0.0;
  for (const double x : w) {
    acc += x;
    cum.push_back(acc);
  }
  return cum;
}

}  // namespace

std::array<std::vector<std::string>, kNumClasses>
SynthParams::default_class_keywords() {
  return {{
      {"fatal", "pronounced", "deceased", "coroner", "fatality", "unresponsive"},
      {"airlifted", "trauma", "critical", "extricated", "unconscious", "fracture"},
      {"laceration", "bruising", "soreness", "treated", "released", "complaint"},
      {"possible", "shaken", "precaution", "refused", "evaluation", "discomfort"},
  }};
}

std::vector<std::string> SynthParams::default_noise_vocab() {
  return {"vehicle",    "driver",     "unit",        "1",          "2",
          "roadway",    "traveling",  "northbound",  "southbound", "eastbound",
          "westbound",  "lane",       "struck",      "rear",       "front",
          "shoulder",   "median",     "intersection","stopped",    "failed",
          "yield",      "curve",      "pavement",    "skidded",    "crossed",
          "centerline", "impact",     "damage",      "towed",      "scene",
          "officer",    "witness",    "stated",      "advised",    "approximately",
          "mph",        "feet",       "ditch",       "guardrail",  "embankment",
          "pole",       "tree",       "deer",        "came",       "rest"};
}

nlohmann::json SynthParams::to_json() const {
  nlohmann::json j;
  j["n_records"] = n_records;
  j["priors"] = priors;
  j["narrative_signal_strength"] = narrative_signal_strength;
  j["class_keywords"] = class_keywords;
  j["noise_vocab"] = noise_vocab;
  j["structured_missing_rate"] = structured_missing_rate;
  j["junk_missing_rate"] = junk_missing_rate;
  j["with_iss"] = with_iss;
  j["iss_means"] = iss_means;
  j["iss_stddev"] = iss_stddev;
  j["year_min"] = year_min;
  j["year_max"] = year_max;
  j["road_class_weights"] = road_class_weights;
  return j;
}

SynthParams SynthParams::from_json(const nlohmann::json& j) {
  SynthParams p;
  if (j.contains("n_records")) p.n_records = j["n_records"].get<std::size_t>();
  if (j.contains("priors")) p.priors = j["priors"].get<std::array<double, kNumClasses>>();
  if (j.contains("narrative_signal_strength")) {
    p.narrative_signal_strength = j["narrative_signal_strength"].get<double>();
  }
  if (j.contains("class_keywords")) {
    p.class_keywords =
        j["class_keywords"].get<std::array<std::vector<std::string>, kNumClasses>>();
  }
  if (j.contains("noise_vocab")) {
    p.noise_vocab = j["noise_vocab"].get<std::vector<std::string>>();
  }
  if (j.contains("structured_missing_rate")) {
    p.structured_missing_rate = j["structured_missing_rate"].get<double>();
  }
  if (j.contains("junk_missing_rate")) {
    p.junk_missing_rate = j["junk_missing_rate"].get<double>();
  }
  if (j.contains("with_iss")) p.with_iss = j["with_iss"].get<bool>();
  if (j.contains("iss_means")) {
    p.iss_means = j["iss_means"].get<std::array<double, kNumClasses>>();
  }
  if (j.contains("iss_stddev")) p.iss_stddev = j["iss_stddev"].get<double>();
  if (j.contains("year_min")) p.year_min = j["year_min"].get<int>();
  if (j.contains("year_max")) p.year_max = j["year_max"].get<int>();
  if (j.contains("road_class_weights")) {
    p.road_class_weights =
        j["road_class_weights"].get<std::array<double, kNumRoadClasses>>();
  }
  return p;
}

SynthData generate_synthetic(const SynthParams& params, std::uint64_t seed) {
  double prior_sum = 0.0;
  for (const double p : params.priors) prior_sum += p;
  if (std::abs(prior_sum - 1.0) > 1e-9) {
    throw DataError("class priors must sum to 1");
  }
  if (params.narrative_signal_strength > 0.0) {
    for (int cls = 0; cls < kNumClasses; ++cls) {
      if (params.class_keywords[cls].empty()) {
        throw DataError(std::string("no narrative keywords for class ") +
                        severity_name(static_cast<SeverityLabel>(cls)));
      }
    }
  }
  if (params.noise_vocab.empty()) {
    throw DataError("noise vocabulary is empty");
  }
  if (params.year_min > params.year_max) {
    throw DataError("year_min exceeds year_max");
  }

  SynthData data;
  Rng rng(derive_seed(seed, "synth"));

  // Road network: per class, one route cut into one-mile segments with
  // slightly varying posted speeds and traffic volumes.
  for (const auto& prof : profiles()) {
    for (int mile = 0; mile < static_cast<int>(kRouteMiles); ++mile) {
      RoadSegment seg;
      seg.route_id = route_of(prof.rc);
      seg.bmp = static_cast<double>(mile);
      seg.emp = static_cast<double>(mile + 1);
      seg.urban = prof.urban;
      seg.functional_class = prof.functional_class;
      seg.lanes = prof.lanes;
      seg.median_divided = prof.divided;
      seg.speed_limit =
          prof.speed_base + 5.0 * (static_cast<double>(rng.uniform_int(3)) - 1.0);
      seg.aadt = std::floor(500.0 + rng.uniform01() * (prof.urban ? 40000.0 : 8000.0));
      data.segments.push_back(std::move(seg));
    }
  }

  const auto prior_cum = cumulative(
      std::vector<double>(params.priors.begin(), params.priors.end()));
  const auto class_weight_cum = cumulative(std::vector<double>(
      params.road_class_weights.begin(), params.road_class_weights.end()));
  std::array<std::vector<std::vector<double>>, kNumClasses> field_cums;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (const auto& field : categorical_fields()) {
      field_cums[cls].push_back(cumulative(field.weights[cls]));
    }
  }

  data.records.reserve(params.n_records);
  if (params.with_iss) data.iss.reserve(params.n_records);
  for (std::size_t i = 0; i < params.n_records; ++i) {
    const int cls = static_cast<int>(rng.pick_cumulative(prior_cum));
    const std::size_t prof_idx = rng.pick_cumulative(class_weight_cum);
    const auto& prof = profiles()[prof_idx];

    CrashRecord rec;
    rec.record_id = "P" + std::to_string(i + 1);
    rec.route_id = route_of(prof.rc);
    rec.milepoint = rng.uniform01() * kRouteMiles;
    rec.severity = static_cast<SeverityLabel>(cls);
    rec.year = params.year_min +
               static_cast<int>(rng.uniform_int(params.year_max - params.year_min + 1));

    const auto& fields = categorical_fields();
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (rng.uniform01() < params.structured_missing_rate) continue;
      const std::size_t pick = rng.pick_cumulative(field_cums[cls][f]);
      rec.categorical[fields[f].name] = fields[f].values[pick];
    }

    if (rng.uniform01() >= params.structured_missing_rate) {
      const double age = 40.0 + 15.0 * rng.normal();
      rec.numeric["age"] = std::clamp(std::round(age), 16.0, 90.0);
    }
    if (rng.uniform01() >= params.structured_missing_rate) {
      // Police-reported speed limit: the posted value of the containing
      // segment, with a small slice disagreeing to exercise the conflict
      // counter.
      const std::size_t seg_idx =
          prof_idx * kRouteMiles + static_cast<std::size_t>(rec.milepoint);
      double speed = data.segments[seg_idx].speed_limit.value();
      if (rng.uniform01() < 0.05) speed += 5.0;
      rec.numeric["speed_limit"] = speed;
    }
    if (rng.uniform01() >= params.structured_missing_rate) {
      rec.numeric["vehicle_count"] =
          1.0 + static_cast<double>(rng.uniform_int(3));
    }
    if (rng.uniform01() >= params.junk_missing_rate) {
      rec.numeric["ems_response_min"] =
          std::round(4.0 + 25.0 * rng.uniform01());
    }

    // Narrative: noise words with class keywords mixed in when the signal
    // coin lands.
    std::vector<std::string> words;
    const std::size_t n_noise = 6 + rng.uniform_int(7);
    for (std::size_t w = 0; w < n_noise; ++w) {
      words.push_back(params.noise_vocab[rng.uniform_int(params.noise_vocab.size())]);
    }
    if (params.narrative_signal_strength > 0.0 &&
        rng.uniform01() < params.narrative_signal_strength) {
      const auto& kw = params.class_keywords[cls];
      const std::size_t n_kw = 2 + rng.uniform_int(3);
      for (std::size_t w = 0; w < n_kw; ++w) {
        words.push_back(kw[rng.uniform_int(kw.size())]);
      }
    }
    rng.shuffle(words);
    std::string narrative;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w > 0) narrative += ' ';
      narrative += words[w];
    }
    rec.narrative = std::move(narrative);

    if (params.with_iss) {
      const double raw = params.iss_means[cls] + params.iss_stddev * rng.normal();
      data.iss.push_back(
          static_cast<int>(std::clamp(std::round(raw), 1.0, 75.0)));
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

SchemaConfig synth_schema() {
  SchemaConfig schema;
  for (const auto& field : categorical_fields()) {
    schema.categorical_cols.push_back(field.name);
  }
  schema.numeric_cols = {"age", "speed_limit", "vehicle_count",
                         "ems_response_min"};
  return schema;
}

}  // namespace crashsev
