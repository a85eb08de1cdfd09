#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "pfbart/priors.hpp"

namespace pfbart {

// Streaming per-leaf sufficient statistics of the residuals. Everything the
// conjugate closed forms need, at any n, without holding the rows.
struct LeafSuffStats {
  std::int64_t n = 0;
  double sum_r = 0.0;
  double sum_r2 = 0.0;

  void add(double r) {
    ++n;
    sum_r += r;
    sum_r2 += r * r;
  }
};

// log P(R | T, sigma): the leaf means integrated out under N(mu_mu,
// sigma_mu^2), noise N(0, sigma^2). One independent term per leaf; an empty
// leaf contributes zero. Throws when sigma <= 0.
double log_marginal_likelihood(std::span<const LeafSuffStats> stats, double sigma,
                               const Hyperparams& hp);

// Full conditional of one leaf mean: N(mean, variance) with
//   mean = (sigma_mu^2 sum_r + sigma^2 mu_mu) / (n sigma_mu^2 + sigma^2)
//   variance = sigma^2 sigma_mu^2 / (n sigma_mu^2 + sigma^2).
// n = 0 recovers the prior. Throws when sigma <= 0.
std::pair<double, double> leaf_posterior(const LeafSuffStats& stats, double sigma,
                                         const Hyperparams& hp);

// Full conditional of sigma^2: inverse-gamma with
//   shape = (nu + n) / 2,  scale = (nu lambda + ssr) / 2.
// Throws when n < 1 or ssr < 0.
std::pair<double, double> sigma_conditional(std::int64_t n, double ssr, const Hyperparams& hp);

}  // namespace pfbart
