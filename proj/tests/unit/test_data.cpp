#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "pfbart/data.hpp"
#include "pfbart/rng.hpp"

using namespace pfbart;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = "pfbart_test_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

constexpr double kPi = 3.14159265358979323846;

// Independent re-statement of the synthetic surfaces, kept deliberately
// separate from the library implementation.
double f1_oracle(std::span<const double> x) {
  return 10 * std::sin(kPi * x[0] * x[1]) + 5 * std::pow(x[0], 2) * (x[2] - 0.5) +
         10 * std::pow(x[0], 3) * x[2] * x[3] + 5 * std::pow(x[0], 4) * x[4];
}
double f2_oracle(std::span<const double> x) {
  return 10 * std::sin(kPi * x[0] * x[1]) + 5 * std::pow(x[1], 2) * (x[2] - 0.5) +
         10 * std::pow(x[0], 3) * x[2] * x[3] + 5 * std::pow(x[0], 4) * x[4];
}
double f3_oracle(std::span<const double> x) {
  return 10 * std::sin(kPi * x[5] * x[1]) + 5 * std::pow(x[5], 2) * (x[2] - 0.5) +
         10 * std::pow(x[5], 3) * x[2] * x[3] + 5 * std::pow(x[5], 4) * x[4];
}

}  // namespace

TEST_CASE("load_csv basic shape and column selection") {
  TempFile f("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = load_csv(f.path, "y");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.names == std::vector<std::string>{"a", "b"});
  CHECK(d.response_name == "y");
  CHECK(d.y == std::vector<double>{3, 6, 9});
  CHECK(d.X(2, 1) == 8.0);

  SUBCASE("default response is the last column") {
    const Dataset d2 = load_csv(f.path);
    CHECK(d2.response_name == "y");
  }
  SUBCASE("response in the middle keeps covariate order") {
    const Dataset d3 = load_csv(f.path, "b");
    CHECK(d3.names == std::vector<std::string>{"a", "y"});
    CHECK(d3.y == std::vector<double>{2, 5, 8});
    CHECK(d3.X(1, 1) == 6.0);
  }
}

TEST_CASE("load_csv error paths name the culprit") {
  SUBCASE("missing response column") {
    TempFile f("a,b\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, "price"),
                         doctest::Contains("price"), std::runtime_error);
  }
  SUBCASE("non-numeric cell cites the row") {
    TempFile f("a,b\n1,2\n3,4\n5,6\n7,8\n9,10\n11,12\nx,14\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, "b"), doctest::Contains("row 8"),
                         std::runtime_error);
  }
  SUBCASE("fewer than two data rows") {
    TempFile f("a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(f.path, "b"), std::runtime_error);
  }
  SUBCASE("ragged row") {
    TempFile f("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, "b"), doctest::Contains("row 3"),
                         std::runtime_error);
  }
}

TEST_CASE("standardization hits the endpoints exactly and round-trips") {
  const std::vector<double> y = {3.0, -1.0, 7.5, 2.2};
  const Standardization s = Standardization::fit(y);
  CHECK(s.standardize(-1.0) == -0.5);
  CHECK(s.standardize(7.5) == 0.5);
  for (double v : y)
    CHECK(s.unstandardize(s.standardize(v)) == doctest::Approx(v).epsilon(1e-13));
  CHECK_THROWS_AS(Standardization::fit(std::vector<double>{2.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("make_grid: binary covariate gets the midpoint") {
  Matrix X(4, 1);
  X(0, 0) = 0.0;
  X(1, 0) = 1.0;
  X(2, 0) = 0.0;
  X(3, 0) = 1.0;
  const CutpointGrid grid = make_grid(X, 100);
  REQUIRE(grid.n_cuts(0) == 1);
  CHECK(grid.cuts[0][0] == 0.5);
}

TEST_CASE("make_grid: quantile grid is strictly increasing inside the range") {
  Rng rng(5, 0);
  Matrix X(2000, 1);
  for (int i = 0; i < 2000; ++i) X(i, 0) = rng.uniform();
  const CutpointGrid grid = make_grid(X, 100);
  REQUIRE(grid.n_cuts(0) == 100);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    lo = std::min(lo, X(i, 0));
    hi = std::max(hi, X(i, 0));
  }
  for (int c = 0; c < 100; ++c) {
    if (c > 0) CHECK(grid.cuts[0][c] > grid.cuts[0][c - 1]);
    CHECK(grid.cuts[0][c] >= lo);
    CHECK(grid.cuts[0][c] < hi);
  }
}

TEST_CASE("make_grid: constant covariate is flagged with an empty grid") {
  Matrix X(3, 2);
  for (int i = 0; i < 3; ++i) {
    X(i, 0) = 4.0;
    X(i, 1) = i;
  }
  std::vector<int> constant;
  const CutpointGrid grid = make_grid(X, 10, &constant);
  CHECK(grid.n_cuts(0) == 0);
  CHECK(grid.n_cuts(1) == 2);
  CHECK(constant == std::vector<int>{0});
}

TEST_CASE("synthetic surfaces at hand-checked points") {
  const std::vector<double> a = {1.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(synthetic_truth(SyntheticFn::F1, a) == doctest::Approx(10.0).epsilon(1e-12));
  const std::vector<double> zeros(10, 0.0);
  CHECK(synthetic_truth(SyntheticFn::F1, zeros) == 0.0);
  std::vector<double> x6_zero = {0.9, 0.8, 0.7, 0.6, 0.5, 0.0, 0.1, 0.2, 0.3, 0.4};
  CHECK(synthetic_truth(SyntheticFn::F3, x6_zero) == 0.0);
}

TEST_CASE("synthetic generators match the independent oracle pointwise") {
  const Dataset d1 = gen_synthetic(SyntheticFn::F1, 1000, 0.0, 99);
  const Dataset d2 = gen_synthetic(SyntheticFn::F2, 1000, 0.0, 99);
  const Dataset d3 = gen_synthetic(SyntheticFn::F3, 1000, 0.0, 99);
  const Dataset d4 = gen_synthetic(SyntheticFn::F4, 1000, 0.0, 99);
  CHECK(d1.p() == 10);
  CHECK(d4.p() == 5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(d1.y[i] == doctest::Approx(f1_oracle(d1.X.row(i))).epsilon(1e-12));
    CHECK(d2.y[i] == doctest::Approx(f2_oracle(d2.X.row(i))).epsilon(1e-12));
    CHECK(d3.y[i] == doctest::Approx(f3_oracle(d3.X.row(i))).epsilon(1e-12));
    CHECK(d4.y[i] == doctest::Approx(f1_oracle(d4.X.row(i))).epsilon(1e-12));
  }
}

TEST_CASE("synthetic covariates are uniform and noise has the asked sd") {
  const Dataset d = gen_synthetic(SyntheticFn::F1, 4000, 1.0, 2024);
  double mean_x = 0.0;
  for (int i = 0; i < d.n(); ++i) mean_x += d.X(i, 0);
  mean_x /= d.n();
  CHECK(std::abs(mean_x - 0.5) < 0.02);
  double noise_ss = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const double eps = d.y[i] - synthetic_truth(SyntheticFn::F1, d.X.row(i));
    noise_ss += eps * eps;
  }
  CHECK(std::sqrt(noise_ss / d.n()) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("holdout split: half and half on 4000 rows") {
  const SplitIndices s = holdout_split(4000, 0.5, 7);
  CHECK(s.train.size() == 2000);
  CHECK(s.test.size() == 2000);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 4000);
}

TEST_CASE("kfold split partitions and is deterministic") {
  const auto folds = kfold_split(10, 10, 3);
  REQUIRE(folds.size() == 10);
  std::set<int> tests;
  for (const auto& f : folds) {
    CHECK(f.test.size() == 1);
    CHECK(f.train.size() == 9);
    tests.insert(f.test.begin(), f.test.end());
  }
  CHECK(tests.size() == 10);

  const auto again = kfold_split(10, 10, 3);
  for (int f = 0; f < 10; ++f) {
    CHECK(folds[f].train == again[f].train);
    CHECK(folds[f].test == again[f].test);
  }

  CHECK_THROWS_WITH_AS(kfold_split(11, 10, 3), doctest::Contains("trim"),
                       std::invalid_argument);
}
