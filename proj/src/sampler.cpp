#include "pfbart/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace pfbart {

namespace {

double sample_sd(std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(y.size() - 1));
}

double quantile_sorted(const std::vector<double>& v, double prob) {
  const double h = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

void affected_leaf_ids(const Move& move, const Tree& old_tree, const Tree& new_tree,
                       std::vector<NodeId>& out_old, std::vector<NodeId>& out_new) {
  out_old.clear();
  out_new.clear();
  switch (move.type) {
    case MoveType::Grow:
      out_old = {move.target};
      out_new = {Tree::left_of(move.target), Tree::right_of(move.target)};
      return;
    case MoveType::Prune:
      out_old = {Tree::left_of(move.target), Tree::right_of(move.target)};
      out_new = {move.target};
      return;
    case MoveType::Swap:
    case MoveType::Change:
      for (NodeId id : old_tree.leaf_ids())
        if (Tree::is_ancestor(move.target, id)) out_old.push_back(id);
      for (NodeId id : new_tree.leaf_ids())
        if (Tree::is_ancestor(move.target, id)) out_new.push_back(id);
      return;
  }
}

std::vector<LeafSuffStats> leaf_stats(const LeafPartition& part, std::span<const NodeId> leaves,
                                      std::span<const double> resid) {
  std::vector<LeafSuffStats> stats(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const int pos = part.leaf_pos(leaves[k]);
    for (int r : part.rows[pos]) stats[k].add(resid[r]);
  }
  return stats;
}

void SamplerConfig::validate(int p) const {
  if (!(hp.alpha > 0.0 && hp.alpha < 1.0))
    throw std::invalid_argument("config: alpha must be in (0,1)");
  if (!(hp.beta >= 0.0)) throw std::invalid_argument("config: beta must be >= 0");
  if (hp.m < 1) throw std::invalid_argument("config: tree count must be >= 1");
  if (!(hp.k > 0.0)) throw std::invalid_argument("config: k must be > 0");
  if (!(hp.nu > 0.0)) throw std::invalid_argument("config: nu must be > 0");
  if (!(hp.q > 0.0 && hp.q < 1.0)) throw std::invalid_argument("config: q must be in (0,1)");
  if (burn_in < 0 || n_draws < 0)
    throw std::invalid_argument("config: burn_in and n_draws must be >= 0");
  if (n_cutpoints < 1) throw std::invalid_argument("config: n_cutpoints must be >= 1");
  const double s = move_probs.grow + move_probs.prune + move_probs.swap + move_probs.change;
  if (move_probs.grow < 0.0 || move_probs.prune < 0.0 || move_probs.swap < 0.0 ||
      move_probs.change < 0.0 || std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument("config: move probabilities must be >= 0 and sum to 1");
  policy.validate(p);
}

Proposal make_grow(const Tree& tree, NodeId leaf, const SplitRule& rule,
                   const ProposalContext& ctx) {
  const int d = Tree::depth_of(leaf);
  Proposal prop;
  prop.move = Move{MoveType::Grow, leaf, 0, rule};
  prop.new_tree = apply_move(tree, prop.move);
  // Forward: pick this leaf, this variable among the allowed set, this
  // cutpoint. Reverse: a prune that picks the freshly grown node.
  const double log_fwd = std::log(ctx.probs.grow) -
                         std::log(static_cast<double>(tree.num_leaves())) -
                         std::log(static_cast<double>(allowed_count(*ctx.policy, d, ctx.p))) -
                         std::log(static_cast<double>(ctx.grids->n_cuts(rule.variable)));
  const double log_rev =
      std::log(ctx.probs.prune) -
      std::log(static_cast<double>(prop.new_tree.prunable_ids().size()));
  prop.log_q_ratio = log_rev - log_fwd;
  prop.log_prior_ratio = log_tree_prior(prop.new_tree, *ctx.policy, *ctx.hp, *ctx.grids) -
                         log_tree_prior(tree, *ctx.policy, *ctx.hp, *ctx.grids);
  return prop;
}

Proposal make_prune(const Tree& tree, NodeId target, const ProposalContext& ctx) {
  const int d = Tree::depth_of(target);
  const SplitRule old_rule = tree.rule(target);
  Proposal prop;
  prop.move = Move{MoveType::Prune, target, 0, SplitRule{}};
  prop.new_tree = apply_move(tree, prop.move);
  const double log_fwd = std::log(ctx.probs.prune) -
                         std::log(static_cast<double>(tree.prunable_ids().size()));
  const double log_rev =
      std::log(ctx.probs.grow) -
      std::log(static_cast<double>(prop.new_tree.num_leaves())) -
      std::log(static_cast<double>(allowed_count(*ctx.policy, d, ctx.p))) -
      std::log(static_cast<double>(ctx.grids->n_cuts(old_rule.variable)));
  prop.log_q_ratio = log_rev - log_fwd;
  prop.log_prior_ratio = log_tree_prior(prop.new_tree, *ctx.policy, *ctx.hp, *ctx.grids) -
                         log_tree_prior(tree, *ctx.policy, *ctx.hp, *ctx.grids);
  return prop;
}

Proposal make_swap(const Tree& tree, NodeId parent, NodeId child, const ProposalContext& ctx) {
  Proposal prop;
  prop.move = Move{MoveType::Swap, parent, child, SplitRule{}};
  prop.new_tree = apply_move(tree, prop.move);
  // Topology is unchanged, so the pair count (and with it q) is symmetric.
  prop.log_q_ratio = 0.0;
  prop.log_prior_ratio = log_tree_prior(prop.new_tree, *ctx.policy, *ctx.hp, *ctx.grids) -
                         log_tree_prior(tree, *ctx.policy, *ctx.hp, *ctx.grids);
  return prop;
}

Proposal make_change(const Tree& tree, NodeId target, const SplitRule& rule,
                     const ProposalContext& ctx) {
  const SplitRule old_rule = tree.rule(target);
  Proposal prop;
  prop.move = Move{MoveType::Change, target, 0, rule};
  prop.new_tree = apply_move(tree, prop.move);
  // Node count and allowed set match in both directions; only the cutpoint
  // menu size can differ between the old and new variable.
  prop.log_q_ratio = std::log(static_cast<double>(ctx.grids->n_cuts(rule.variable))) -
                     std::log(static_cast<double>(ctx.grids->n_cuts(old_rule.variable)));
  prop.log_prior_ratio = log_tree_prior(prop.new_tree, *ctx.policy, *ctx.hp, *ctx.grids) -
                         log_tree_prior(tree, *ctx.policy, *ctx.hp, *ctx.grids);
  return prop;
}

// Draw order per proposal (mirrored by the reference plain-BART chain used in
// the strict-generalization test; keep the two in sync):
//   u0 kind; then Grow: u1 leaf, u2 variable, u3 cutpoint;
//   Prune/Swap: u1 target; Change: u1 node, u2 variable, u3 cutpoint.
// Rejected outcomes consume only the draws made up to the failure point.
std::optional<Proposal> propose_move(const Tree& tree, const ProposalContext& ctx,
                                     const Matrix& X, const LeafPartition& partition,
                                     Rng& rng) {
  const double u = rng.uniform();
  MoveType kind;
  if (u < ctx.probs.grow)
    kind = MoveType::Grow;
  else if (u < ctx.probs.grow + ctx.probs.prune)
    kind = MoveType::Prune;
  else if (u < ctx.probs.grow + ctx.probs.prune + ctx.probs.swap)
    kind = MoveType::Swap;
  else
    kind = MoveType::Change;

  const FixedLayerPolicy& policy = *ctx.policy;
  switch (kind) {
    case MoveType::Grow: {
      const auto leaves = tree.leaf_ids();
      const NodeId leaf = leaves[rng.uniform_int(leaves.size())];
      const int d = Tree::depth_of(leaf);
      int variable;
      if (d >= policy.depth()) {
        variable = static_cast<int>(rng.uniform_int(static_cast<std::size_t>(ctx.p)));
      } else {
        const auto allowed = allowed_variables(policy, d, ctx.p);
        variable = allowed[rng.uniform_int(allowed.size())];
      }
      const int n_cuts = ctx.grids->n_cuts(variable);
      if (n_cuts == 0) return std::nullopt;  // constant covariate, nothing to split on
      const double cut = ctx.grids->cuts[variable][rng.uniform_int(n_cuts)];
      const Move move{MoveType::Grow, leaf, 0, SplitRule{variable, cut}};
      if (!move_legal(policy, tree, move)) return std::nullopt;
      // Growing a childless side would leave an empty leaf; reject up front
      // rather than leaning on the likelihood.
      const auto& rows = partition.rows[partition.leaf_pos(leaf)];
      std::size_t n_left = 0;
      for (int r : rows)
        if (X(r, variable) <= cut) ++n_left;
      if (n_left == 0 || n_left == rows.size()) return std::nullopt;
      return make_grow(tree, leaf, move.rule, ctx);
    }
    case MoveType::Prune: {
      const auto nogs = tree.prunable_ids();
      if (nogs.empty()) return std::nullopt;
      const NodeId target = nogs[rng.uniform_int(nogs.size())];
      const Move move{MoveType::Prune, target, 0, SplitRule{}};
      if (!move_legal(policy, tree, move)) return std::nullopt;
      return make_prune(tree, target, ctx);
    }
    case MoveType::Swap: {
      const auto pairs = tree.internal_pairs();
      if (pairs.empty()) return std::nullopt;
      const auto [parent, child] = pairs[rng.uniform_int(pairs.size())];
      const Move move{MoveType::Swap, parent, child, SplitRule{}};
      if (!move_legal(policy, tree, move)) return std::nullopt;
      return make_swap(tree, parent, child, ctx);
    }
    case MoveType::Change: {
      const auto internals = tree.internal_ids();
      if (internals.empty()) return std::nullopt;
      const NodeId target = internals[rng.uniform_int(internals.size())];
      const int d = Tree::depth_of(target);
      int variable;
      if (d >= policy.depth()) {
        variable = static_cast<int>(rng.uniform_int(static_cast<std::size_t>(ctx.p)));
      } else {
        const auto allowed = allowed_variables(policy, d, ctx.p);
        variable = allowed[rng.uniform_int(allowed.size())];
      }
      const int n_cuts = ctx.grids->n_cuts(variable);
      if (n_cuts == 0) return std::nullopt;
      const double cut = ctx.grids->cuts[variable][rng.uniform_int(n_cuts)];
      const Move move{MoveType::Change, target, 0, SplitRule{variable, cut}};
      if (!move_legal(policy, tree, move)) return std::nullopt;
      return make_change(tree, target, move.rule, ctx);
    }
  }
  return std::nullopt;
}

double acceptance_probability(const Proposal& prop, std::span<const LeafSuffStats> stats_old,
                              std::span<const LeafSuffStats> stats_new, double sigma,
                              const Hyperparams& hp) {
  const double ll_old = log_marginal_likelihood(stats_old, sigma, hp);
  const double ll_new = log_marginal_likelihood(stats_new, sigma, hp);
  const double log_ratio = prop.log_q_ratio + (ll_new - ll_old) + prop.log_prior_ratio;
  if (!std::isfinite(log_ratio))
    throw std::logic_error("acceptance: non-finite MH log ratio (upstream bug)");
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

LeafPartition repartition(const Tree& new_tree, const Move& move, const Tree& old_tree,
                          const LeafPartition& old_part, const Matrix& X) {
  LeafPartition out;
  out.leaves = new_tree.leaf_ids();
  out.rows.resize(out.leaves.size());

  auto copy_bucket = [&](std::size_t k) {
    const int pos = out.leaf_pos(old_part.leaves[k]);
    out.rows[pos] = old_part.rows[k];
  };

  switch (move.type) {
    case MoveType::Grow: {
      const int lpos = out.leaf_pos(Tree::left_of(move.target));
      const int rpos = out.leaf_pos(Tree::right_of(move.target));
      for (std::size_t k = 0; k < old_part.leaves.size(); ++k) {
        if (old_part.leaves[k] == move.target) {
          for (int r : old_part.rows[k]) {
            const bool left = X(r, move.rule.variable) <= move.rule.cutpoint;
            out.rows[left ? lpos : rpos].push_back(r);
          }
        } else {
          copy_bucket(k);
        }
      }
      return out;
    }
    case MoveType::Prune: {
      const NodeId lid = Tree::left_of(move.target);
      const NodeId rid = Tree::right_of(move.target);
      const int lpos = old_part.leaf_pos(lid);
      const int rpos = old_part.leaf_pos(rid);
      const int tpos = out.leaf_pos(move.target);
      std::merge(old_part.rows[lpos].begin(), old_part.rows[lpos].end(),
                 old_part.rows[rpos].begin(), old_part.rows[rpos].end(),
                 std::back_inserter(out.rows[tpos]));
      for (std::size_t k = 0; k < old_part.leaves.size(); ++k)
        if (old_part.leaves[k] != lid && old_part.leaves[k] != rid) copy_bucket(k);
      return out;
    }
    case MoveType::Swap:
    case MoveType::Change: {
      // Only rows inside the edited subtree can change leaf.
      std::vector<int> moved;
      for (std::size_t k = 0; k < old_part.leaves.size(); ++k) {
        if (Tree::is_ancestor(move.target, old_part.leaves[k]))
          moved.insert(moved.end(), old_part.rows[k].begin(), old_part.rows[k].end());
        else
          copy_bucket(k);
      }
      std::sort(moved.begin(), moved.end());
      for (int r : moved) {
        const NodeId leaf = new_tree.route_from(move.target, X.row(r));
        out.rows[out.leaf_pos(leaf)].push_back(r);
      }
      return out;
    }
  }
  return out;
}

void draw_leaf_values(Tree& tree, const LeafPartition& part, std::span<const double> resid,
                      double sigma, const Hyperparams& hp, Rng& rng) {
  for (std::size_t k = 0; k < part.leaves.size(); ++k) {
    LeafSuffStats st;
    for (int r : part.rows[k]) st.add(resid[r]);
    const auto [mean, variance] = leaf_posterior(st, sigma, hp);
    tree.set_leaf_value(part.leaves[k], rng.normal(mean, std::sqrt(variance)));
  }
}

std::vector<double> fitted_values(const Tree& tree, const LeafPartition& part, int n) {
  std::vector<double> fits(n, 0.0);
  for (std::size_t k = 0; k < part.leaves.size(); ++k) {
    const double mu = tree.leaf_value(part.leaves[k]);
    for (int r : part.rows[k]) fits[r] = mu;
  }
  return fits;
}

GibbsSampler::GibbsSampler(const Dataset& data, const SamplerConfig& config)
    : data_(data), cfg_(config), rng_(config.seed, config.stream) {
  cfg_.validate(data_.p());
  ystd_ = Standardization::fit(data_.y);
  y_.resize(data_.y.size());
  for (std::size_t i = 0; i < y_.size(); ++i) y_[i] = ystd_.standardize(data_.y[i]);
  grids_ = make_grid(data_.X, cfg_.n_cutpoints);

  const auto [mu_mu, sigma_mu] = derive_leaf_prior(y_, cfg_.hp.m, cfg_.hp.k);
  cfg_.hp.mu_mu = mu_mu;
  cfg_.hp.sigma_mu = sigma_mu;
  cfg_.hp.lambda = derive_sigma_prior(y_, cfg_.hp.nu, cfg_.hp.q);
  cfg_.hp.validate();

  sigma_ = sample_sd(y_);
  forest_.assign(cfg_.hp.m, Tree(0.0));
  fits_.assign(cfg_.hp.m, std::vector<double>(data_.n(), 0.0));
  total_fit_.assign(data_.n(), 0.0);
  resid_buf_.resize(data_.n());
}

void GibbsSampler::update_tree(int j) {
  const int n = data_.n();
  for (int i = 0; i < n; ++i) resid_buf_[i] = y_[i] - total_fit_[i] + fits_[j][i];

  Tree& tree = forest_[j];
  LeafPartition part = leaf_partition(tree, data_.X);
  const ProposalContext ctx{&grids_, &cfg_.policy, &cfg_.hp, cfg_.move_probs, data_.p()};

  auto prop = propose_move(tree, ctx, data_.X, part, rng_);
  if (prop) {
    LeafPartition part_new = repartition(prop->new_tree, prop->move, tree, part, data_.X);
    std::vector<NodeId> ids_old, ids_new;
    affected_leaf_ids(prop->move, tree, prop->new_tree, ids_old, ids_new);
    const auto stats_old = leaf_stats(part, ids_old, resid_buf_);
    const auto stats_new = leaf_stats(part_new, ids_new, resid_buf_);
    const double a = acceptance_probability(*prop, stats_old, stats_new, sigma_, cfg_.hp);
    if (rng_.uniform() < a) {
      tree = std::move(prop->new_tree);
      part = std::move(part_new);
    }
  }

  draw_leaf_values(tree, part, resid_buf_, sigma_, cfg_.hp, rng_);
  auto new_fits = fitted_values(tree, part, n);
  for (int i = 0; i < n; ++i) total_fit_[i] += new_fits[i] - fits_[j][i];
  fits_[j] = std::move(new_fits);
}

void GibbsSampler::sweep() {
  for (int j = 0; j < cfg_.hp.m; ++j) update_tree(j);

  // Re-sum the cache exactly before the variance draw so incremental error
  // cannot accumulate across sweeps.
  for (int i = 0; i < data_.n(); ++i) {
    double s = 0.0;
    for (int j = 0; j < cfg_.hp.m; ++j) s += fits_[j][i];
    total_fit_[i] = s;
  }
  double ssr = 0.0;
  for (int i = 0; i < data_.n(); ++i) {
    const double d = y_[i] - total_fit_[i];
    ssr += d * d;
  }
  const auto [shape, scale] = sigma_conditional(data_.n(), ssr, cfg_.hp);
  sigma_ = std::sqrt(rng_.inverse_gamma(shape, scale));
}

std::vector<double> GibbsSampler::recompute_total_fit() const {
  std::vector<double> out(data_.n(), 0.0);
  for (int i = 0; i < data_.n(); ++i)
    for (const Tree& t : forest_) out[i] += t.evaluate(data_.X.row(i));
  return out;
}

void GibbsSampler::record(Trace& trace) const {
  trace.sigma.push_back(sigma_);
  std::vector<std::int64_t> counts(data_.p(), 0);
  for (const Tree& t : forest_)
    t.for_each([&](NodeId, int, bool leaf, const SplitRule* rule, double) {
      if (!leaf) ++counts[rule->variable];
    });
  trace.split_counts.push_back(std::move(counts));
  std::vector<double> fitted(data_.n());
  for (int i = 0; i < data_.n(); ++i) fitted[i] = ystd_.unstandardize(total_fit_[i]);
  trace.fitted_sums.push_back(std::move(fitted));
  trace.forests.push_back(forest_);
}

Trace GibbsSampler::run() {
  Trace trace;
  trace.p = data_.p();
  trace.n_train = data_.n();
  trace.names = data_.names;
  trace.response_name = data_.response_name;
  trace.ystd = ystd_;
  trace.config = cfg_;
  const int total = cfg_.burn_in + cfg_.n_draws;
  for (int it = 0; it < total; ++it) {
    sweep();
    if (it >= cfg_.burn_in) record(trace);
  }
  return trace;
}

Trace run_chain(const Dataset& data, const SamplerConfig& config) {
  GibbsSampler sampler(data, config);
  return sampler.run();
}

PredictionSummary predict(const Trace& trace, const Matrix& X_new) {
  if (X_new.cols() != trace.p)
    throw std::invalid_argument("predict: data has " + std::to_string(X_new.cols()) +
                                " covariates, model was trained with " +
                                std::to_string(trace.p));
  if (trace.n_draws() == 0) throw std::invalid_argument("predict: empty trace");
  PredictionSummary out;
  out.mean.resize(X_new.rows());
  out.q05.resize(X_new.rows());
  out.q95.resize(X_new.rows());
  std::vector<double> draws(trace.n_draws());
  for (int i = 0; i < X_new.rows(); ++i) {
    const auto x = X_new.row(i);
    for (int d = 0; d < trace.n_draws(); ++d) {
      double s = 0.0;
      for (const Tree& t : trace.forests[d]) s += t.evaluate(x);
      draws[d] = trace.ystd.unstandardize(s);
    }
    double mean = 0.0;
    for (double v : draws) mean += v;
    out.mean[i] = mean / static_cast<double>(draws.size());
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    out.q05[i] = quantile_sorted(sorted, 0.05);
    out.q95[i] = quantile_sorted(sorted, 0.95);
  }
  return out;
}

VariableFrequency variable_frequency(const Trace& trace) {
  if (trace.n_draws() == 0) throw std::invalid_argument("variable_frequency: empty trace");
  VariableFrequency out;
  out.proportion.assign(trace.p, 0.0);
  std::vector<std::int64_t> counts(trace.p, 0);
  for (const auto& forest : trace.forests)
    for (const Tree& t : forest)
      t.for_each([&](NodeId, int, bool leaf, const SplitRule* rule, double) {
        if (!leaf) {
          ++counts[rule->variable];
          ++out.total_splits;
        }
      });
  if (out.total_splits > 0)
    for (int v = 0; v < trace.p; ++v)
      out.proportion[v] =
          static_cast<double>(counts[v]) / static_cast<double>(out.total_splits);
  return out;
}

}  // namespace pfbart
