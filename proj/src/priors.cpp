#include "pfbart/priors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pfbart {

void Hyperparams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("hyperparams: alpha must be in (0,1)");
  if (!(beta >= 0.0)) throw std::invalid_argument("hyperparams: beta must be >= 0");
  if (m < 1) throw std::invalid_argument("hyperparams: m must be >= 1");
  if (!(k > 0.0)) throw std::invalid_argument("hyperparams: k must be > 0");
  if (!(nu > 0.0)) throw std::invalid_argument("hyperparams: nu must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("hyperparams: q must be in (0,1)");
  if (!(sigma_mu > 0.0)) throw std::invalid_argument("hyperparams: sigma_mu must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("hyperparams: lambda must be > 0");
}

std::pair<double, double> derive_leaf_prior(std::span<const double> y, int m, double k) {
  if (y.empty()) throw std::invalid_argument("leaf prior: empty response");
  double mn = y[0], mx = y[0];
  for (double v : y) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mn == mx) throw std::invalid_argument("leaf prior: constant response");
  if (m < 1 || !(k > 0.0)) throw std::invalid_argument("leaf prior: need m >= 1 and k > 0");
  return {0.0, 0.5 / (k * std::sqrt(static_cast<double>(m)))};
}

double derive_sigma_prior(std::span<const double> y, double nu, double q) {
  if (y.size() < 2) throw std::invalid_argument("sigma prior: need at least 2 observations");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double s2 = ss / static_cast<double>(y.size() - 1);
  if (s2 <= 0.0) throw std::invalid_argument("sigma prior: response has zero variance");
  // P(sigma < s) = q  <=>  lambda = s^2 * chisq_nu^{-1}(1-q) / nu.
  const boost::math::chi_squared chisq(nu);
  return s2 * boost::math::quantile(chisq, 1.0 - q) / nu;
}

double log_tree_prior(const Tree& tree, const FixedLayerPolicy& policy, const Hyperparams& hp,
                      const CutpointGrid& grids, int truncate_depth) {
  const int p = grids.n_vars();
  double lp = 0.0;
  tree.for_each([&](NodeId id, int depth, bool leaf, const SplitRule* rule, double) {
    const bool truncated = truncate_depth >= 0 && depth >= truncate_depth;
    const double ps = truncated ? 0.0 : split_probability(policy, depth, hp.alpha, hp.beta);
    if (leaf) {
      lp += std::log1p(-ps);
      return;
    }
    if (truncated)
      throw std::domain_error("tree prior: internal node at truncated depth " +
                              std::to_string(depth));
    if (!variable_allowed(policy, depth, rule->variable, p))
      throw std::domain_error("tree prior: variable " + std::to_string(rule->variable) +
                              " not allowed at depth " + std::to_string(depth) + " (node " +
                              std::to_string(id) + ")");
    if (rule->variable < 0 || rule->variable >= p || !grids.contains(rule->variable, rule->cutpoint))
      throw std::domain_error("tree prior: cutpoint off-grid at node " + std::to_string(id));
    lp += std::log(ps);
    lp -= std::log(static_cast<double>(allowed_count(policy, depth, p)));
    lp -= std::log(static_cast<double>(grids.n_cuts(rule->variable)));
  });
  return lp;
}

}  // namespace pfbart
