#pragma once

#include <span>
#include <utility>

#include "pfbart/constraints.hpp"
#include "pfbart/data.hpp"
#include "pfbart/tree.hpp"

namespace pfbart {

// Prior constants. alpha..q are user-facing; mu_mu, sigma_mu and lambda are
// derived from the training response before sampling starts.
struct Hyperparams {
  double alpha = 0.95;   // split-prior base
  double beta = 2.0;     // split-prior decay
  int m = 200;           // tree count
  double k = 2.0;        // leaf-shrinkage multiple
  double nu = 3.0;       // sigma-prior degrees of freedom
  double q = 0.90;       // sigma-prior calibration quantile
  double mu_mu = 0.0;    // leaf prior mean (standardized scale)
  double sigma_mu = 0.1; // leaf prior sd (derived)
  double lambda = 1.0;   // sigma-prior scale (derived)

  void validate() const;  // throws std::invalid_argument
};

// Leaf prior on the standardized response scale: mu_mu = 0 and
// sigma_mu = 0.5/(k*sqrt(m)), so the m-tree sum places k prior sd across the
// data half-range. Throws on a constant response.
std::pair<double, double> derive_leaf_prior(std::span<const double> y, int m, double k);

// lambda solving P(sigma < s) = q under sigma^2 ~ nu*lambda/chisq_nu, with s
// the sample sd of y. Throws when s is zero.
double derive_sigma_prior(std::span<const double> y, double nu, double q);

// log P(T): split/no-split terms per node plus uniform variable and cutpoint
// choices over the policy's allowed sets. Nodes at depth >= truncate_depth
// are forced non-split with probability one (used by the finite-enumeration
// normalization check); truncate_depth < 0 disables truncation. Throws on a
// rule that is off-grid or disallowed at its depth.
double log_tree_prior(const Tree& tree, const FixedLayerPolicy& policy, const Hyperparams& hp,
                      const CutpointGrid& grids, int truncate_depth = -1);

}  // namespace pfbart
