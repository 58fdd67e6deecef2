#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/matrix.hpp"
#include "crashsev/prep.hpp"
#include "crashsev/schema.hpp"

using namespace crashsev;

namespace {

std::vector<CrashRecord> small_records() {
  std::vector<CrashRecord> records;
  const std::vector<std::string> colors = {"red", "blue", "blue", "green", ""};
  for (int i = 0; i < 5; ++i) {
    CrashRecord r;
    r.record_id = "r" + std::to_string(i);
    r.severity = static_cast<SeverityLabel>(i % kNumClasses);
    if (!colors[i].empty()) r.categorical["color"] = colors[i];
    if (i != 2) r.numeric["age"] = 20.0 + i;
    records.push_back(std::move(r));
  }
  return records;
}

SchemaConfig small_schema() {
  SchemaConfig schema;
  schema.categorical_cols = {"color"};
  schema.numeric_cols = {"age"};
  return schema;
}

}  // namespace

TEST_CASE("frame construction codes categoricals lexicographically") {
  const auto records = small_records();
  const auto frame = build_frame(records, small_schema());
  REQUIRE(frame.rows() == 5);
  REQUIRE(frame.cols() == 2);
  CHECK(frame.columns[0].kind == ColumnKind::Categorical);
  CHECK(frame.columns[0].categories ==
        std::vector<std::string>{"blue", "green", "red"});
  CHECK(frame.at(0, 0) == 2.0);  // red
  CHECK(frame.at(1, 0) == 0.0);  // blue
  CHECK(frame.at(3, 0) == 1.0);  // green
  CHECK(frame.is_missing(4, 0));
  CHECK(frame.is_missing(2, 1));
  CHECK(frame.at(3, 1) == 23.0);
  CHECK(frame.labels[1] == 1);
  CHECK(frame.row_ids[4] == "r4");
}

TEST_CASE("columns past the missing threshold are dropped, not imputed") {
  FeatureMatrix m(4, 2);
  m.columns[0].name = "mostly_absent";
  m.columns[1].name = "kept";
  for (std::size_t r = 0; r < 4; ++r) {
    m.at(r, 1) = static_cast<double>(r);
    if (r < 3) {
      m.at(r, 0) = std::nan("");
      m.set_missing(r, 0, true);
    } else {
      m.at(r, 0) = 1.0;
    }
  }
  m.labels = {0, 1, 2, 3};
  m.row_ids = {"a", "b", "c", "d"};

  CleanReport report;
  const auto cleaned = clean_features(m, 0.5, &report);
  REQUIRE(cleaned.cols() == 1);
  CHECK(cleaned.columns[0].name == "kept");
  CHECK(report.dropped_columns == std::vector<std::string>{"mostly_absent"});
}

TEST_CASE("a column missing exactly half its cells survives") {
  FeatureMatrix m(4, 1);
  m.columns[0].name = "half";
  for (std::size_t r = 0; r < 4; ++r) {
    if (r < 2) {
      m.at(r, 0) = std::nan("");
      m.set_missing(r, 0, true);
    } else {
      m.at(r, 0) = 10.0 + static_cast<double>(r);
    }
  }
  m.labels = {0, 0, 1, 1};
  m.row_ids = {"a", "b", "c", "d"};
  const auto cleaned = clean_features(m, 0.5);
  CHECK(cleaned.cols() == 1);
  // Lower median of {12, 13} is 12; imputed cells keep their mask.
  CHECK(cleaned.at(0, 0) == 12.0);
  CHECK(cleaned.is_missing(0, 0));
  CHECK_FALSE(cleaned.is_missing(2, 0));
}

TEST_CASE("categorical mode imputation breaks ties toward the smaller code") {
  FeatureMatrix m(5, 1);
  m.columns[0].name = "color";
  m.columns[0].kind = ColumnKind::Categorical;
  m.columns[0].categories = {"blue", "red"};
  // Two blues, two reds, one missing: tie goes to blue (code 0).
  const double vals[] = {0, 1, 1, 0};
  for (int r = 0; r < 4; ++r) m.at(r, 0) = vals[r];
  m.at(4, 0) = std::nan("");
  m.set_missing(4, 0, true);
  m.labels = {0, 1, 2, 3, 0};
  m.row_ids = {"a", "b", "c", "d", "e"};
  const auto cleaned = clean_features(m, 0.5);
  CHECK(cleaned.at(4, 0) == 0.0);
  CHECK(cleaned.is_missing(4, 0));
}

TEST_CASE("one-hot encoding expands categoricals and flags unseen values") {
  const auto records = small_records();
  const auto frame = build_frame(records, small_schema());
  const auto cleaned = clean_features(frame, 0.5);

  CategoricalEncoder encoder;
  encoder.fit(cleaned);
  std::size_t unseen = 0;
  const auto encoded = encoder.transform(cleaned, &unseen);
  CHECK(unseen == 0);
  REQUIRE(encoded.cols() == 4);  // three colors + age
  CHECK(encoded.columns[0].name == "color=blue");
  CHECK(encoded.columns[0].kind == ColumnKind::OneHot);
  CHECK(encoded.columns[2].name == "color=red");
  CHECK(encoded.at(0, 2) == 1.0);
  CHECK(encoded.at(0, 0) == 0.0);
  // Exactly one hot cell per encoded row.
  for (std::size_t r = 0; r < encoded.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) sum += encoded.at(r, c);
    CHECK(sum == 1.0);
  }

  // A frame with a category the encoder never saw: all-zero block, counted.
  // Row 3 ("green", a code the new list reuses) moves to "red" so only row 0
  // carries the unseen value.
  auto other = cleaned;
  other.at(0, 0) = 1.0;
  other.at(3, 0) = 2.0;
  other.columns[0].categories = {"blue", "purple", "red"};
  std::size_t unseen2 = 0;
  const auto encoded2 = encoder.transform(other, &unseen2);
  CHECK(unseen2 == 1);
  CHECK(encoded2.at(0, 0) == 0.0);
  CHECK(encoded2.at(0, 1) == 0.0);
  CHECK(encoded2.at(0, 2) == 0.0);
}

TEST_CASE("transforming an unknown column is an error") {
  const auto frame = build_frame(small_records(), small_schema());
  const auto cleaned = clean_features(frame, 0.5);
  CategoricalEncoder encoder;
  encoder.fit(cleaned);
  auto renamed = cleaned;
  renamed.columns[0].name = "paint";
  CHECK_THROWS_AS(encoder.transform(renamed), DataError);
}

namespace {

FeatureMatrix labeled_matrix(const std::vector<int>& labels) {
  FeatureMatrix m(labels.size(), 1);
  m.columns[0].name = "x";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    m.at(r, 0) = static_cast<double>(r);
  }
  m.labels = labels;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    m.row_ids.push_back("row" + std::to_string(r));
  }
  return m;
}

}  // namespace

TEST_CASE("stratified split keeps per-class counts within one row of target") {
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(0);
  for (int i = 0; i < 25; ++i) labels.push_back(1);
  for (int i = 0; i < 10; ++i) labels.push_back(3);
  const auto m = labeled_matrix(labels);

  const auto split = stratified_split(m, {0.70, 0.15, 0.15}, 99);
  CHECK(split.train.rows() + split.validation.rows() + split.test.rows() == 75);
  CHECK(split.train.partition == Partition::Train);
  CHECK(split.validation.partition == Partition::Validation);
  CHECK(split.test.partition == Partition::Test);

  const auto count_class = [](const FeatureMatrix& part, int cls) {
    int n = 0;
    for (const int y : part.labels) {
      if (y == cls) ++n;
    }
    return n;
  };
  for (const auto& [cls, total] :
       std::vector<std::pair<int, int>>{{0, 40}, {1, 25}, {3, 10}}) {
    CHECK(std::abs(count_class(split.train, cls) - 0.70 * total) <= 1.0);
    CHECK(std::abs(count_class(split.validation, cls) - 0.15 * total) <= 1.0);
    CHECK(std::abs(count_class(split.test, cls) - 0.15 * total) <= 1.0);
  }

  // No row lost, none duplicated.
  std::set<std::string> ids;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& id : part->row_ids) CHECK(ids.insert(id).second);
  }
  CHECK(ids.size() == 75);

  // Same seed, same split; different seed, different split.
  const auto again = stratified_split(m, {0.70, 0.15, 0.15}, 99);
  CHECK(again.train.row_ids == split.train.row_ids);
  const auto other = stratified_split(m, {0.70, 0.15, 0.15}, 100);
  CHECK(other.train.row_ids != split.train.row_ids);
}

TEST_CASE("split rejects classes too small to spread over three parts") {
  const auto m = labeled_matrix({0, 0, 0, 1, 1});
  CHECK_THROWS_WITH_AS(stratified_split(m, {0.70, 0.15, 0.15}, 1),
                       doctest::Contains("Major"), DataError);
}

TEST_CASE("split proportions must sum to one") {
  const auto m = labeled_matrix({0, 0, 0, 0});
  CHECK_THROWS_AS(stratified_split(m, {0.5, 0.2, 0.2}, 1), DataError);
}

TEST_CASE("view screening names the first class below the floor") {
  DatasetView view;
  view.view_id = "g1:R2L";
  view.name = "R2L";
  view.record_ids = {0, 1, 2, 3, 4, 5};
  // 3 Fatal, 3 Major, nothing else: both Minor and Possible are absent, and
  // Fatal is under a floor of 10.
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  const auto screened = screen_view(view, labels, 10);
  CHECK_FALSE(screened.trainable);
  CHECK(screened.skip_reason.find("Fatal") != std::string::npos);

  const auto passing = screen_view(view, labels, 3);
  CHECK_FALSE(passing.trainable);  // Minor count 0 still below 3

  std::vector<int> rich_labels = {0, 1, 2, 3, 0, 1};
  DatasetView rich = view;
  const auto ok = screen_view(rich, rich_labels, 1);
  CHECK(ok.trainable);
  CHECK(ok.skip_reason.empty());
}
