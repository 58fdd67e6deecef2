#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/ingest.hpp"
#include "crashsev/synth.hpp"
#include "crashsev/text.hpp"

using namespace crashsev;

TEST_CASE("severity draws track the configured priors") {
  SynthParams params;
  params.n_records = 6000;
  params.with_iss = false;
  const auto data = generate_synthetic(params, 11);
  REQUIRE(data.records.size() == params.n_records);

  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& rec : data.records) {
    ++counts[static_cast<std::size_t>(rec.severity)];
  }
  const double n = static_cast<double>(params.n_records);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double p = params.priors[c];
    const double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(static_cast<double>(counts[c]) - n * p) < 3.5 * sigma);
  }
}

TEST_CASE("the same seed regenerates the corpus exactly") {
  SynthParams params;
  params.n_records = 300;
  const auto a = generate_synthetic(params, 99);
  const auto b = generate_synthetic(params, 99);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].record_id == b.records[i].record_id);
    CHECK(a.records[i].route_id == b.records[i].route_id);
    CHECK(a.records[i].milepoint == b.records[i].milepoint);
    CHECK(a.records[i].severity == b.records[i].severity);
    CHECK(a.records[i].narrative == b.records[i].narrative);
    CHECK(a.records[i].categorical == b.records[i].categorical);
  }
  CHECK(a.iss == b.iss);

  const auto c = generate_synthetic(params, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.records.size() && !any_diff; ++i) {
    any_diff = a.records[i].narrative != c.records[i].narrative ||
               a.records[i].severity != c.records[i].severity;
  }
  CHECK(any_diff);
}

TEST_CASE("segments cover every road class and join cleanly") {
  SynthParams params;
  params.n_records = 800;
  const auto data = generate_synthetic(params, 7);
  const auto schema = synth_schema();
  JoinDiagnostics diag;
  auto joined =
      linear_join(data.records, data.segments, schema.police_speed_field, &diag);
  CHECK(diag.unmatched == 0);
  REQUIRE(joined.size() == data.records.size());
  assign_road_classes(joined, schema);

  std::set<RoadClass> seen;
  for (const auto& rec : joined) seen.insert(rec.road_class.value());
  CHECK(seen.size() == kNumRoadClasses);
}

TEST_CASE("zero signal strength leaves narratives keyword-free") {
  SynthParams params;
  params.n_records = 400;
  params.narrative_signal_strength = 0.0;
  const auto data = generate_synthetic(params, 3);

  std::set<std::string> keywords;
  for (const auto& list : params.class_keywords) {
    for (const auto& kw : list) {
      for (const auto& tok : tokenize(kw)) keywords.insert(tok);
    }
  }
  // The noise vocabulary is disjoint from the keyword lists, so at zero
  // signal no keyword token should ever appear.
  for (const auto& rec : data.records) {
    for (const auto& tok : tokenize(rec.narrative)) {
      CHECK(keywords.count(tok) == 0);
    }
  }
}

TEST_CASE("full signal strength embeds keywords of the true class") {
  SynthParams params;
  params.n_records = 400;
  params.narrative_signal_strength = 1.0;
  const auto data = generate_synthetic(params, 3);

  std::size_t with_keyword = 0;
  for (const auto& rec : data.records) {
    const auto toks = tokenize(rec.narrative);
    const auto& list =
        params.class_keywords[static_cast<std::size_t>(rec.severity)];
    const bool hit = std::any_of(list.begin(), list.end(), [&](const auto& kw) {
      const auto kts = tokenize(kw);
      return std::search(toks.begin(), toks.end(), kts.begin(), kts.end()) !=
             toks.end();
    });
    if (hit) ++with_keyword;
  }
  CHECK(with_keyword == data.records.size());
}

TEST_CASE("injury scores decrease from fatal to possible on average") {
  SynthParams params;
  params.n_records = 4000;
  const auto data = generate_synthetic(params, 17);
  REQUIRE(data.iss.size() == data.records.size());

  std::array<double, kNumClasses> sum{};
  std::array<std::size_t, kNumClasses> cnt{};
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.records[i].severity);
    sum[c] += data.iss[i];
    ++cnt[c];
    CHECK(data.iss[i] >= 1);
    CHECK(data.iss[i] <= 75);
  }
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    REQUIRE(cnt[c - 1] > 0);
    REQUIRE(cnt[c] > 0);
    CHECK(sum[c - 1] / cnt[c - 1] > sum[c] / cnt[c]);
  }
}

TEST_CASE("empty keyword lists are rejected up front") {
  SynthParams params;
  params.class_keywords[1].clear();
  CHECK_THROWS_AS(generate_synthetic(params, 1), DataError);
}

TEST_CASE("parameter JSON round-trips") {
  SynthParams params;
  params.n_records = 123;
  params.narrative_signal_strength = 0.25;
  params.iss_stddev = 4.5;
  const auto back = SynthParams::from_json(params.to_json());
  CHECK(back.n_records == params.n_records);
  CHECK(back.narrative_signal_strength == params.narrative_signal_strength);
  CHECK(back.iss_stddev == params.iss_stddev);
  CHECK(back.priors == params.priors);
  CHECK(back.class_keywords == params.class_keywords);
}
