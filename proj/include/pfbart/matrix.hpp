#pragma once

#include <span>
#include <vector>

namespace pfbart {

// Row-major numeric matrix; the covariate container used throughout.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int n, int p) : n_(n), p_(p), v_(static_cast<std::size_t>(n) * p) {}

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * p_ + j]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * p_ + j]; }

  std::span<const double> row(int i) const {
    return {v_.data() + static_cast<std::size_t>(i) * p_, static_cast<std::size_t>(p_)};
  }

  int rows() const { return n_; }
  int cols() const { return p_; }

 private:
  int n_ = 0, p_ = 0;
  std::vector<double> v_;
};

}  // namespace pfbart
