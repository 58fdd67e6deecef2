#include <doctest.h>

#include <numeric>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/kernels.hpp"
#include "crashsev/rng.hpp"

using namespace crashsev;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols,
                            std::uint64_t seed) {
  FeatureMatrix m(rows, cols);
  Rng rng(seed);
  for (std::size_t c = 0; c < cols; ++c) {
    m.columns[c].name = "f" + std::to_string(c);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rng.uniform01();
    m.labels.push_back(0);
    m.row_ids.push_back("r" + std::to_string(r));
  }
  return m;
}

}  // namespace

TEST_CASE("nearest neighbours are sorted by distance, ties by row index") {
  FeatureMatrix m(5, 1);
  m.columns[0].name = "x";
  const double xs[] = {0.0, 1.0, 3.0, 5.0, 5.0};
  for (int r = 0; r < 5; ++r) {
    m.at(r, 0) = xs[r];
    m.labels.push_back(0);
    m.row_ids.push_back(std::to_string(r));
  }
  std::vector<std::size_t> members(5);
  std::iota(members.begin(), members.end(), 0);

  const auto nn = kernels::knn_serial(m, members, 2);
  REQUIRE(nn.size() == 5);
  CHECK(nn[0] == std::vector<std::size_t>{1, 2});
  // Row 2 at x=3: rows 3 and 4 both at distance 2, row 1 at distance 2 as
  // well; the three-way tie resolves by index.
  CHECK(nn[2] == std::vector<std::size_t>{1, 3});
  CHECK(nn[3] == std::vector<std::size_t>{4, 2});
}

TEST_CASE("duplicate coordinates only skip the query row itself") {
  FeatureMatrix m(3, 1);
  m.columns[0].name = "x";
  for (int r = 0; r < 3; ++r) {
    m.at(r, 0) = 1.0;  // all identical
    m.labels.push_back(0);
    m.row_ids.push_back(std::to_string(r));
  }
  const std::vector<std::size_t> members = {0, 1, 2};
  const auto nn = kernels::knn_serial(m, members, 2);
  CHECK(nn[0] == std::vector<std::size_t>{1, 2});
  CHECK(nn[1] == std::vector<std::size_t>{0, 2});
  CHECK(nn[2] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("k larger than the pool returns everyone else") {
  const auto m = random_matrix(4, 2, 5);
  const std::vector<std::size_t> members = {0, 1, 2, 3};
  const auto nn = kernels::knn_serial(m, members, 10);
  for (const auto& list : nn) CHECK(list.size() == 3);
}

TEST_CASE("parallel and serial neighbour search agree exactly") {
  const auto m = random_matrix(200, 6, 31);
  std::vector<std::size_t> members;
  for (std::size_t r = 0; r < 200; r += 2) members.push_back(r);

  const auto serial = kernels::knn_serial(m, members, 5);
  for (const int threads : {1, 2, 4}) {
    const auto parallel = kernels::knn(m, members, 5, threads);
    CHECK(parallel == serial);
  }
}

TEST_CASE("neighbour search rejects a nonpositive k") {
  const auto m = random_matrix(4, 2, 7);
  const std::vector<std::size_t> members = {0, 1, 2, 3};
  CHECK_THROWS_AS(kernels::knn(m, members, 0, 1), DataError);
}
