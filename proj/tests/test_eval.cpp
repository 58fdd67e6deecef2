#include <doctest.h>

#include <cmath>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/eval.hpp"
#include "crashsev/rng.hpp"
#include "oracles.hpp"

using namespace crashsev;

TEST_CASE("confusion matrix counts true/pred pairs") {
  const std::vector<int> yt = {0, 0, 1, 2, 3, 3};
  const std::vector<int> yp = {0, 1, 1, 2, 3, 0};
  const auto cm = ConfusionMatrix::from(yt, yp);
  CHECK(cm.counts[0][0] == 1);
  CHECK(cm.counts[0][1] == 1);
  CHECK(cm.counts[3][0] == 1);
  CHECK(cm.counts[3][3] == 1);
  CHECK(cm.total() == 6);
  CHECK(cm.trace() == 4);
}

TEST_CASE("evaluate matches the direct-counting reference on random labelings") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(200);
    std::vector<int> yt(n), yp(n);
    for (std::size_t i = 0; i < n; ++i) {
      yt[i] = static_cast<int>(rng.uniform_int(kNumClasses));
      yp[i] = static_cast<int>(rng.uniform_int(kNumClasses));
    }
    const auto report = evaluate(yt, yp);
    const auto oracle = oracles::metric_oracle(yt, yp);
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(report.per_class[c].precision ==
            doctest::Approx(oracle.precision[c]).epsilon(1e-12));
      CHECK(report.per_class[c].recall ==
            doctest::Approx(oracle.recall[c]).epsilon(1e-12));
      CHECK(report.per_class[c].f1 == doctest::Approx(oracle.f1[c]).epsilon(1e-12));
      CHECK(report.per_class[c].support == oracle.support[c]);
    }
    CHECK(report.macro_f1 == doctest::Approx(oracle.macro_f1).epsilon(1e-12));
    CHECK(report.weighted_f1 ==
          doctest::Approx(oracle.weighted_f1).epsilon(1e-12));
    CHECK(report.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-12));
  }
}

TEST_CASE("never-predicted class scores zero precision and is counted") {
  // Class 1 has support but no predictions.
  const std::vector<int> yt = {0, 1, 1, 2};
  const std::vector<int> yp = {0, 0, 2, 2};
  const auto report = evaluate(yt, yp);
  CHECK(report.per_class[1].precision == 0.0);
  CHECK(report.per_class[1].recall == 0.0);
  CHECK(report.zero_predicted_classes == 1);
}

TEST_CASE("macro averages span only classes present in the truth") {
  // No Fatal rows at all: macro divides by 3, not 4.
  const std::vector<int> yt = {1, 1, 2, 3};
  const std::vector<int> yp = {1, 2, 2, 3};
  const auto report = evaluate(yt, yp);
  const auto oracle = oracles::metric_oracle(yt, yp);
  CHECK(report.macro_f1 == doctest::Approx(oracle.macro_f1).epsilon(1e-12));
  CHECK(report.per_class[0].support == 0);
}

TEST_CASE("published per-class scores aggregate to the known averages") {
  const std::vector<double> f1 = {0.833, 0.490, 0.563, 0.689};
  const std::vector<std::int64_t> supports = {162, 514, 1885, 2290};
  CHECK(std::abs(macro_average(f1) - 0.644) < 0.0005);
  CHECK(std::abs(weighted_average(f1, supports) - 0.624) < 0.0005);
}

TEST_CASE("result table carries the expected headings") {
  const std::vector<int> yt = {0, 1, 2, 3};
  const std::vector<int> yp = {0, 1, 2, 3};
  const auto table = evaluate(yt, yp).to_table();
  CHECK(table.find("Macro Avg") != std::string::npos);
  CHECK(table.find("Micro Avg") != std::string::npos);
  CHECK(table.find("Support") != std::string::npos);
}

TEST_CASE("report JSON round-trips") {
  Rng rng(5);
  std::vector<int> yt(50), yp(50);
  for (int i = 0; i < 50; ++i) {
    yt[i] = static_cast<int>(rng.uniform_int(kNumClasses));
    yp[i] = static_cast<int>(rng.uniform_int(kNumClasses));
  }
  auto report = evaluate(yt, yp);
  report.config_id = "roundtrip";
  const auto back = EvalReport::from_json(report.to_json());
  CHECK(back.config_id == report.config_id);
  CHECK(back.macro_f1 == report.macro_f1);
  CHECK(back.weighted_f1 == report.weighted_f1);
  CHECK(back.confusion.counts == report.confusion.counts);
}

TEST_CASE("six-view worked example ranks broadest context first") {
  std::vector<ViewScore> scores = {
      {"U2L", ViewScheme::Group1, 0.630},
      {"Urban", ViewScheme::Group2, 0.634},
      {"Two-Lane", ViewScheme::Group2, 0.628},
      {"Undivided", ViewScheme::Group2, 0.611},
      {"Rural", ViewScheme::Group2, 0.615},
      {"All", ViewScheme::Group3, 0.644},
  };
  const auto ranked = rank_candidates(scores);
  REQUIRE(ranked.size() == 6);
  CHECK(ranked[0].view_name == "All");
  CHECK(ranked[1].view_name == "Urban");
  CHECK(ranked[2].view_name == "U2L");
}

TEST_CASE("exact rank ties prefer the broader scheme") {
  std::vector<ViewScore> scores = {
      {"narrow", ViewScheme::Group1, 0.5},
      {"wide", ViewScheme::Group3, 0.5},
      {"mid", ViewScheme::Group2, 0.5},
  };
  const auto ranked = rank_candidates(scores);
  CHECK(ranked[0].view_name == "wide");
  CHECK(ranked[1].view_name == "mid");
  CHECK(ranked[2].view_name == "narrow");
}

TEST_CASE("injury score bins partition 1..75 with fixed boundaries") {
  CHECK(iss_classify(1) == IssBin::Minor);
  CHECK(iss_classify(8) == IssBin::Minor);
  CHECK(iss_classify(9) == IssBin::Moderate);
  CHECK(iss_classify(15) == IssBin::Moderate);
  CHECK(iss_classify(16) == IssBin::Severe);
  CHECK(iss_classify(24) == IssBin::Severe);
  CHECK(iss_classify(25) == IssBin::VerySevere);
  CHECK(iss_classify(75) == IssBin::VerySevere);
  CHECK_THROWS_AS(iss_classify(0), DataError);
  CHECK_THROWS_AS(iss_classify(76), DataError);
}

TEST_CASE("severity ordering over injury scores is validated") {
  std::vector<IssRecord> records;
  const std::array<int, 4> means = {30, 20, 12, 5};
  Rng rng(31);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (int i = 0; i < 40; ++i) {
      int iss = means[cls] + static_cast<int>(rng.uniform_int(5)) - 2;
      iss = std::max(1, std::min(75, iss));
      records.push_back({static_cast<SeverityLabel>(cls), iss});
    }
  }
  const auto v = iss_validate(records);
  CHECK(v.monotonic);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    CHECK(v.support[cls] == 40);
    std::int64_t row_total = 0;
    for (int b = 0; b < 4; ++b) row_total += v.counts[cls][b];
    CHECK(row_total == 40);
  }
  CHECK(v.mean_iss[0] > v.mean_iss[1]);
  CHECK(v.mean_iss[1] > v.mean_iss[2]);
  CHECK(v.mean_iss[2] > v.mean_iss[3]);

  // Flat means are not monotonic.
  std::vector<IssRecord> flat;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    flat.push_back({static_cast<SeverityLabel>(cls), 10});
  }
  CHECK_FALSE(iss_validate(flat).monotonic);

  // A missing severity level is not monotonic either.
  std::vector<IssRecord> sparse = {{SeverityLabel::Fatal, 30},
                                   {SeverityLabel::Major, 20},
                                   {SeverityLabel::Minor, 10}};
  CHECK_FALSE(iss_validate(sparse).monotonic);
}
