#include "pfbart/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pfbart/rng.hpp"

namespace pfbart {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double parse_cell(const std::string& raw, int file_line, const std::string& column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    fail("csv: non-numeric cell '" + raw + "' at row " + std::to_string(file_line) +
         ", column '" + column + "'");
  return value;
}

// Linear-interpolation quantile (type 7) on sorted values.
double quantile_sorted(const std::vector<double>& v, double prob) {
  const double h = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<std::size_t>(i) + 1);
    std::swap(idx[i], idx[static_cast<int>(j)]);
  }
  return idx;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) fail("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail("csv: '" + path + "' is empty");
  std::vector<std::string> header;
  for (const auto& h : split_line(line)) header.push_back(unquote(h));
  if (header.size() < 2)
    fail("csv: '" + path + "' needs a response column and at least one covariate");

  int response_idx = -1;
  if (response_column.empty()) {
    response_idx = static_cast<int>(header.size()) - 1;
  } else {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == response_column) response_idx = static_cast<int>(j);
    if (response_idx < 0)
      fail("csv: response column '" + response_column + "' not found in '" + path + "'");
  }

  std::vector<std::vector<double>> rows;
  int file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      fail("csv: row " + std::to_string(file_line) + " has " + std::to_string(cells.size()) +
           " cells, header has " + std::to_string(header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      row[j] = parse_cell(cells[j], file_line, header[j]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) fail("csv: '" + path + "' has fewer than 2 data rows");

  Dataset data;
  data.response_name = header[response_idx];
  const int p = static_cast<int>(header.size()) - 1;
  data.X = Matrix(static_cast<int>(rows.size()), p);
  data.y.resize(rows.size());
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<int>(j) != response_idx) data.names.push_back(header[j]);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (static_cast<int>(j) == response_idx)
        data.y[i] = rows[i][j];
      else
        data.X(static_cast<int>(i), col++) = rows[i][j];
    }
  }
  return data;
}

RawTable load_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail("csv: '" + path + "' is empty");
  RawTable table;
  for (const auto& h : split_line(line)) table.header.push_back(unquote(h));

  std::vector<std::vector<double>> rows;
  int file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size())
      fail("csv: row " + std::to_string(file_line) + " has " + std::to_string(cells.size()) +
           " cells, header has " + std::to_string(table.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      row[j] = parse_cell(cells[j], file_line, table.header[j]);
    rows.push_back(std::move(row));
  }
  table.values = Matrix(static_cast<int>(rows.size()), static_cast<int>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return table;
}

Dataset subset(const Dataset& data, std::span<const int> rows) {
  Dataset out;
  out.names = data.names;
  out.response_name = data.response_name;
  out.X = Matrix(static_cast<int>(rows.size()), data.p());
  out.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y[i] = data.y[rows[i]];
    for (int j = 0; j < data.p(); ++j) out.X(static_cast<int>(i), j) = data.X(rows[i], j);
  }
  return out;
}

Standardization Standardization::fit(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("standardization: empty response");
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  if (*mn == *mx) throw std::invalid_argument("standardization: constant response");
  return Standardization{*mn, *mx - *mn};
}

bool CutpointGrid::contains(int v, double c) const {
  const auto& g = cuts[v];
  return std::binary_search(g.begin(), g.end(), c);
}

CutpointGrid make_grid(const Matrix& X, int n_cut, std::vector<int>* constant_vars) {
  if (n_cut < 1) throw std::invalid_argument("make_grid: n_cut must be >= 1");
  CutpointGrid grid;
  grid.cuts.resize(X.cols());
  for (int v = 0; v < X.cols(); ++v) {
    std::vector<double> vals(X.rows());
    for (int i = 0; i < X.rows(); ++i) vals[i] = X(i, v);
    std::sort(vals.begin(), vals.end());
    std::vector<double> uniq = vals;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 2) {
      if (constant_vars) constant_vars->push_back(v);
      continue;
    }
    std::vector<double>& g = grid.cuts[v];
    if (static_cast<int>(uniq.size()) < n_cut) {
      for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
        g.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    } else {
      for (int j = 1; j <= n_cut; ++j)
        g.push_back(quantile_sorted(vals, static_cast<double>(j) / (n_cut + 1)));
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    const double lo = uniq.front(), hi = uniq.back();
    g.erase(std::remove_if(g.begin(), g.end(), [&](double c) { return c < lo || c >= hi; }),
            g.end());
  }
  return grid;
}

SyntheticFn synthetic_fn_from_name(const std::string& name) {
  if (name == "F1") return SyntheticFn::F1;
  if (name == "F2") return SyntheticFn::F2;
  if (name == "F3") return SyntheticFn::F3;
  if (name == "F4") return SyntheticFn::F4;
  throw std::invalid_argument("unknown synthetic function '" + name + "' (use F1..F4)");
}

const char* synthetic_fn_name(SyntheticFn fn) {
  switch (fn) {
    case SyntheticFn::F1: return "F1";
    case SyntheticFn::F2: return "F2";
    case SyntheticFn::F3: return "F3";
    case SyntheticFn::F4: return "F4";
  }
  return "?";
}

double synthetic_truth(SyntheticFn fn, std::span<const double> x) {
  constexpr double pi = 3.14159265358979323846;
  switch (fn) {
    case SyntheticFn::F1:
    case SyntheticFn::F4:
      return 10.0 * std::sin(pi * x[0] * x[1]) + 5.0 * x[0] * x[0] * (x[2] - 0.5) +
             10.0 * x[0] * x[0] * x[0] * x[2] * x[3] +
             5.0 * x[0] * x[0] * x[0] * x[0] * x[4];
    case SyntheticFn::F2:
      return 10.0 * std::sin(pi * x[0] * x[1]) + 5.0 * x[1] * x[1] * (x[2] - 0.5) +
             10.0 * x[0] * x[0] * x[0] * x[2] * x[3] +
             5.0 * x[0] * x[0] * x[0] * x[0] * x[4];
    case SyntheticFn::F3:
      return 10.0 * std::sin(pi * x[5] * x[1]) + 5.0 * x[5] * x[5] * (x[2] - 0.5) +
             10.0 * x[5] * x[5] * x[5] * x[2] * x[3] +
             5.0 * x[5] * x[5] * x[5] * x[5] * x[4];
  }
  return 0.0;
}

Dataset gen_synthetic(SyntheticFn fn, int n, double noise_sd, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_synthetic: n must be >= 1");
  const int p = fn == SyntheticFn::F4 ? 5 : 10;
  Dataset data;
  data.X = Matrix(n, p);
  data.y.resize(n);
  data.response_name = "y";
  for (int j = 0; j < p; ++j) data.names.push_back("x" + std::to_string(j + 1));

  Rng rng(seed, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data.X(i, j) = rng.uniform();
  for (int i = 0; i < n; ++i) {
    const double f = synthetic_truth(fn, data.X.row(i));
    data.y[i] = noise_sd > 0.0 ? f + rng.normal(0.0, noise_sd) : f;
  }
  return data;
}

SplitIndices holdout_split(int n, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("holdout_split: fraction must be in (0,1)");
  Rng rng(seed, 0);
  const auto idx = shuffled_indices(n, rng);
  const int n_train = static_cast<int>(std::lround(fraction * n));
  SplitIndices out;
  out.train.assign(idx.begin(), idx.begin() + n_train);
  out.test.assign(idx.begin() + n_train, idx.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<SplitIndices> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw std::invalid_argument("kfold_split: need 2 <= k <= n");
  if (n % k != 0)
    throw std::invalid_argument(
        "kfold_split: n=" + std::to_string(n) + " not divisible by k=" + std::to_string(k) +
        "; trim the dataset to a multiple of k first");
  Rng rng(seed, 0);
  const auto idx = shuffled_indices(n, rng);
  const int fold = n / k;
  std::vector<SplitIndices> out(k);
  for (int f = 0; f < k; ++f) {
    for (int i = 0; i < n; ++i) {
      const bool in_test = i >= f * fold && i < (f + 1) * fold;
      (in_test ? out[f].test : out[f].train).push_back(idx[i]);
    }
    std::sort(out[f].train.begin(), out[f].train.end());
    std::sort(out[f].test.begin(), out[f].test.end());
  }
  return out;
}

}  // namespace pfbart
