#include "pfbart/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace pfbart {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

double log_marginal_likelihood(std::span<const LeafSuffStats> stats, double sigma,
                               const Hyperparams& hp) {
  if (!(sigma > 0.0)) throw std::domain_error("marginal likelihood: sigma must be > 0");
  const double s2 = sigma * sigma;
  const double sm2 = hp.sigma_mu * hp.sigma_mu;
  double ll = 0.0;
  for (const LeafSuffStats& st : stats) {
    if (st.n == 0) continue;
    const auto n = static_cast<double>(st.n);
    // R ~ N(mu_mu 1, s2 I + sm2 11'); Woodbury gives the quadratic form below.
    const double denom = s2 + n * sm2;
    const double d1 = st.sum_r - n * hp.mu_mu;                            // sum (r - mu_mu)
    const double d2 = st.sum_r2 - 2.0 * hp.mu_mu * st.sum_r + n * hp.mu_mu * hp.mu_mu;
    ll += -0.5 * n * (kLog2Pi + std::log(s2)) + 0.5 * std::log(s2 / denom) -
          (d2 - sm2 * d1 * d1 / denom) / (2.0 * s2);
  }
  return ll;
}

std::pair<double, double> leaf_posterior(const LeafSuffStats& stats, double sigma,
                                         const Hyperparams& hp) {
  if (!(sigma > 0.0)) throw std::domain_error("leaf posterior: sigma must be > 0");
  const double s2 = sigma * sigma;
  const double sm2 = hp.sigma_mu * hp.sigma_mu;
  const auto n = static_cast<double>(stats.n);
  const double denom = n * sm2 + s2;
  const double mean = (sm2 * stats.sum_r + s2 * hp.mu_mu) / denom;
  const double variance = s2 * sm2 / denom;
  return {mean, variance};
}

std::pair<double, double> sigma_conditional(std::int64_t n, double ssr, const Hyperparams& hp) {
  if (n < 1) throw std::domain_error("sigma conditional: need n >= 1");
  if (ssr < 0.0) throw std::domain_error("sigma conditional: ssr must be >= 0");
  const double shape = (hp.nu + static_cast<double>(n)) / 2.0;
  const double scale = (hp.nu * hp.lambda + ssr) / 2.0;
  return {shape, scale};
}

}  // namespace pfbart
