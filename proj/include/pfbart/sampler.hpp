#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfbart/constraints.hpp"
#include "pfbart/data.hpp"
#include "pfbart/likelihood.hpp"
#include "pfbart/priors.hpp"
#include "pfbart/rng.hpp"
#include "pfbart/tree.hpp"

namespace pfbart {

struct MoveProbs {
  double grow = 0.25;
  double prune = 0.25;
  double swap = 0.10;
  double change = 0.40;
};

struct SamplerConfig {
  Hyperparams hp;              // hp.m is the tree count
  FixedLayerPolicy policy;
  int burn_in = 500;
  int n_draws = 1000;
  MoveProbs move_probs;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;    // substream index; distinct chains use distinct streams
  int n_cutpoints = 100;

  int n_trees() const { return hp.m; }
  void validate(int p) const;  // throws std::invalid_argument
};

// Post-burn-in record: everything prediction and the diagnostics need.
struct Trace {
  int p = 0;
  int n_train = 0;
  std::vector<std::string> names;
  std::string response_name;
  Standardization ystd;
  SamplerConfig config;                                 // resolved echo (derived hp included)
  std::vector<double> sigma;                            // standardized scale
  std::vector<std::vector<std::int64_t>> split_counts;  // per draw, per variable
  std::vector<std::vector<double>> fitted_sums;         // per draw, per train row, raw scale
  std::vector<std::vector<Tree>> forests;               // per draw

  int n_draws() const { return static_cast<int>(sigma.size()); }
};

// A candidate tree plus the two log ratios the MH acceptance needs. The
// likelihood ratio is computed by the caller from sufficient statistics of
// the leaves the move touches (all other leaf terms cancel exactly).
struct Proposal {
  Move move;
  Tree new_tree;
  double log_q_ratio = 0.0;      // log q(T*,T) - log q(T,T*)
  double log_prior_ratio = 0.0;  // log P(T*) - log P(T)
};

// Inputs shared by all proposal constructors.
struct ProposalContext {
  const CutpointGrid* grids = nullptr;
  const FixedLayerPolicy* policy = nullptr;
  const Hyperparams* hp = nullptr;
  MoveProbs probs;
  int p = 0;
};

// Deterministic constructors for each move kind, exposed for direct testing
// of the transition-ratio bookkeeping. They assume the move is structurally
// valid and policy-legal.
Proposal make_grow(const Tree& tree, NodeId leaf, const SplitRule& rule,
                   const ProposalContext& ctx);
Proposal make_prune(const Tree& tree, NodeId target, const ProposalContext& ctx);
Proposal make_swap(const Tree& tree, NodeId parent, NodeId child, const ProposalContext& ctx);
Proposal make_change(const Tree& tree, NodeId target, const SplitRule& rule,
                     const ProposalContext& ctx);

// One MH proposal draw. nullopt is the Rejected outcome: the sampled kind had
// no target, the move was illegal under the policy, or a grow would leave an
// empty child. The RNG advances deterministically either way.
std::optional<Proposal> propose_move(const Tree& tree, const ProposalContext& ctx,
                                     const Matrix& X, const LeafPartition& partition, Rng& rng);

// min(1, exp(log_q + [llik(new) - llik(old)] + log_prior)). The two stats
// spans must come from the same residual vector. Throws on a non-finite
// intermediate (an upstream bug, not a rejection).
double acceptance_probability(const Proposal& prop, std::span<const LeafSuffStats> stats_old,
                              std::span<const LeafSuffStats> stats_new, double sigma,
                              const Hyperparams& hp);

// Partition for the post-move tree, derived locally from the old one: grow
// splits one bucket, prune merges two, change/swap reroute the edited
// subtree only.
LeafPartition repartition(const Tree& new_tree, const Move& move, const Tree& old_tree,
                          const LeafPartition& old_part, const Matrix& X);

// Leaves whose sufficient statistics a move touches; every other leaf term
// cancels exactly in the MH likelihood ratio.
void affected_leaf_ids(const Move& move, const Tree& old_tree, const Tree& new_tree,
                       std::vector<NodeId>& out_old, std::vector<NodeId>& out_new);

// Sufficient statistics of the named leaves, from the residual vector.
std::vector<LeafSuffStats> leaf_stats(const LeafPartition& part, std::span<const NodeId> leaves,
                                      std::span<const double> resid);

// Redraws every leaf value from its full conditional, ascending node id.
void draw_leaf_values(Tree& tree, const LeafPartition& part, std::span<const double> resid,
                      double sigma, const Hyperparams& hp, Rng& rng);

// Per-row fitted values of a tree from its partition and leaf values.
std::vector<double> fitted_values(const Tree& tree, const LeafPartition& part, int n);

// The full Gibbs loop over trees and sigma on one standardized dataset.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const SamplerConfig& config);

  void sweep();
  Trace run();  // burn_in + n_draws sweeps from a fresh state

  // State observers (tests and diagnostics).
  const std::vector<Tree>& forest() const { return forest_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& total_fit() const { return total_fit_; }
  std::vector<double> recompute_total_fit() const;  // from-scratch oracle
  const CutpointGrid& grids() const { return grids_; }
  const Standardization& ystd() const { return ystd_; }
  const Hyperparams& hyperparams() const { return cfg_.hp; }
  const SamplerConfig& config() const { return cfg_; }

 private:
  void update_tree(int j);
  void record(Trace& trace) const;

  Dataset data_;
  SamplerConfig cfg_;
  Standardization ystd_;
  std::vector<double> y_;  // standardized response
  CutpointGrid grids_;
  Rng rng_;

  std::vector<Tree> forest_;
  std::vector<std::vector<double>> fits_;  // per tree, per row
  std::vector<double> total_fit_;
  double sigma_ = 1.0;
  std::vector<double> resid_buf_;
};

Trace run_chain(const Dataset& data, const SamplerConfig& config);

struct PredictionSummary {
  std::vector<double> mean, q05, q95;
};

// Posterior mean and empirical 5%/95% quantiles of the sum-of-trees fit,
// raw response scale. Throws on a covariate-dimension mismatch.
PredictionSummary predict(const Trace& trace, const Matrix& X_new);

struct VariableFrequency {
  std::vector<double> proportion;   // sums to 1 when any split exists
  std::int64_t total_splits = 0;    // 0 flags an all-stump trace
};

VariableFrequency variable_frequency(const Trace& trace);

}  // namespace pfbart
