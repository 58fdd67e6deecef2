// Timing comparison of the serial reference paths against their OpenMP
// counterparts: neighbour search, forest fitting, batch prediction, and the
// tf-idf corpus transform. Numbers are wall-clock; each kernel also checks
// that both paths agree so a speedup never hides a divergence.

#include <chrono>
#include <cstdio>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "crashsev/forest.hpp"
#include "crashsev/kernels.hpp"
#include "crashsev/rng.hpp"
#include "crashsev/text.hpp"

using namespace crashsev;

namespace {

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Row {
  std::string name;
  double serial_s = 0.0;
  double parallel_s = 0.0;
  bool same = false;
};

void print_table(const std::vector<Row>& rows, int threads) {
  std::printf("\n%-28s %12s %12s %9s %6s\n", "kernel", "serial (s)",
              "parallel (s)", "speedup", "same");
  std::printf("%-28s %12s %12s %9s %6s\n", "----------------------------",
              "----------", "------------", "-------", "----");
  for (const auto& r : rows) {
    std::printf("%-28s %12.3f %12.3f %8.2fx %6s\n", r.name.c_str(), r.serial_s,
                r.parallel_s, r.serial_s / r.parallel_s,
                r.same ? "yes" : "NO");
  }
  std::printf("\n(%d threads)\n", threads);
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols,
                            std::uint64_t seed) {
  FeatureMatrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    m.columns[c].name = "f" + std::to_string(c);
  }
  Rng rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m.at(r, c) = rng.uniform01() * 10.0;
    }
    m.labels.push_back(static_cast<int>(rng.uniform_int(kNumClasses)));
    m.row_ids.push_back("r" + std::to_string(r));
  }
  m.partition = Partition::Train;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel kernel timings"};
  int threads = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  std::size_t knn_rows = 4000;
  std::size_t fit_rows = 3000;
  app.add_option("--threads", threads, "Parallel thread count");
  app.add_option("--knn-rows", knn_rows, "Rows for the neighbour search");
  app.add_option("--fit-rows", fit_rows, "Rows for forest fit and predict");
  CLI11_PARSE(app, argc, argv);

  std::vector<Row> rows;

  {
    const auto X = random_matrix(knn_rows, 8, 1);
    std::vector<std::size_t> members(X.rows());
    std::iota(members.begin(), members.end(), 0);
    Row row;
    row.name = "knn k=5, " + std::to_string(knn_rows) + " rows";
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = kernels::knn_serial(X, members, 5);
    row.serial_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = kernels::knn(X, members, 5, threads);
    row.parallel_s = seconds(t0);
    row.same = serial == parallel;
    rows.push_back(row);
  }

  const auto train = random_matrix(fit_rows, 20, 2);
  RandomForestParams params;
  params.n_trees = 60;
  ForestModel forest;
  {
    Row row;
    row.name = "forest fit, 60 trees";
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = fit_random_forest(train, params, 7, 1);
    row.serial_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    forest = fit_random_forest(train, params, 7, threads);
    row.parallel_s = seconds(t0);
    row.same = predict(serial, train, 1) == predict(forest, train, 1);
    rows.push_back(row);
  }

  {
    Row row;
    row.name = "forest predict";
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = predict_proba(forest, train, 1);
    row.serial_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = predict_proba(forest, train, threads);
    row.parallel_s = seconds(t0);
    row.same = serial == parallel;
    rows.push_back(row);
  }

  {
    Rng rng(3);
    std::vector<std::vector<std::string>> docs;
    for (int d = 0; d < 20000; ++d) {
      std::vector<std::string> doc;
      const std::size_t len = 5 + rng.uniform_int(20);
      for (std::size_t t = 0; t < len; ++t) {
        doc.push_back("t" + std::to_string(rng.uniform_int(800)));
      }
      docs.push_back(std::move(doc));
    }
    const auto model = tfidf_fit(docs, 500);
    Row row;
    row.name = "tf-idf transform, 20k docs";
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = tfidf_transform_corpus_serial(model, docs);
    row.serial_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = tfidf_transform_corpus(model, docs, threads);
    row.parallel_s = seconds(t0);
    row.same = serial == parallel;
    rows.push_back(row);
  }

  print_table(rows, threads);
  for (const auto& r : rows) {
    if (!r.same) return 1;
  }
  return 0;
}
