#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfbart/matrix.hpp"

namespace pfbart {

struct Dataset {
  Matrix X;
  std::vector<double> y;
  std::vector<std::string> names;  // covariate column labels, size p
  std::string response_name;

  int n() const { return X.rows(); }
  int p() const { return X.cols(); }
};

// Comma-separated numeric table with a header row. The named column becomes
// the response (empty name: last column); the remaining columns become X in
// file order. Errors name the offending row or column.
Dataset load_csv(const std::string& path, const std::string& response_column = "");

// The whole numeric table with its header, no response designated. Used by
// prediction, which selects columns by the training names.
struct RawTable {
  std::vector<std::string> header;
  Matrix values;
};
RawTable load_csv_table(const std::string& path);

Dataset subset(const Dataset& data, std::span<const int> rows);

// Affine map taking the observed response range onto [-0.5, 0.5]; the leaf
// prior calibration assumes this scale.
struct Standardization {
  double y_min = 0.0;
  double y_range = 1.0;

  double standardize(double y) const { return (y - y_min) / y_range - 0.5; }
  double unstandardize(double z) const { return (z + 0.5) * y_range + y_min; }

  static Standardization fit(std::span<const double> y);  // throws on constant y
};

// Candidate split thresholds per covariate, strictly increasing, within
// [min, max) of the observed values. A constant covariate gets an empty grid.
struct CutpointGrid {
  std::vector<std::vector<double>> cuts;

  int n_vars() const { return static_cast<int>(cuts.size()); }
  int n_cuts(int v) const { return static_cast<int>(cuts[v].size()); }
  bool contains(int v, double c) const;
};

// n_cut equally spaced quantiles per covariate, deduplicated; covariates with
// fewer unique values fall back to midpoints between consecutive uniques.
// Indices of constant covariates are appended to *constant_vars when given.
CutpointGrid make_grid(const Matrix& X, int n_cut, std::vector<int>* constant_vars = nullptr);

enum class SyntheticFn { F1, F2, F3, F4 };

SyntheticFn synthetic_fn_from_name(const std::string& name);  // "F1".."F4"
const char* synthetic_fn_name(SyntheticFn fn);

// Noiseless regression surface at x (needs 5 coordinates for F4, 10 otherwise;
// extra coordinates are ignored).
double synthetic_truth(SyntheticFn fn, std::span<const double> x);

// Covariates i.i.d. uniform(0,1), y = f(x) + N(0, noise_sd^2). F4 carries
// only the five active covariates; the rest carry ten.
Dataset gen_synthetic(SyntheticFn fn, int n, double noise_sd, std::uint64_t seed);

struct SplitIndices {
  std::vector<int> train, test;
};

// One shuffled pair with |train| = round(fraction * n).
SplitIndices holdout_split(int n, double fraction, std::uint64_t seed);

// k disjoint, exhaustive folds of size n/k. Throws when k does not divide n;
// trim the dataset first.
std::vector<SplitIndices> kfold_split(int n, int k, std::uint64_t seed);

}  // namespace pfbart
