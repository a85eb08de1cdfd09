#pragma once

#include <vector>

#include "pfbart/tree.hpp"

namespace pfbart {

// The partially-fixed policy: the ordered variables pinned to the top h tree
// levels, plus the three logical switches. h = 0 reproduces plain BART for
// every operation in this module.
struct FixedLayerPolicy {
  std::vector<int> fixed_vars;  // depths 0..h-1, in order
  bool swap_flag = false;       // fixed vars may appear at any fixed layer
  bool allow_prune = true;      // permit prunes inside the fixed layers
  bool change_prior = false;    // restart the depth prior below the fixed layers

  int depth() const { return static_cast<int>(fixed_vars.size()); }  // h

  // Throws std::invalid_argument on duplicate or out-of-range entries.
  void validate(int p) const;
};

// Variables eligible to split at `node_depth` (root is depth 0):
//   depth >= h            -> all p variables
//   depth < h, swap=false -> { fixed_vars[depth] }
//   depth < h, swap=true  -> all fixed_vars
std::vector<int> allowed_variables(const FixedLayerPolicy& policy, int node_depth, int p);
int allowed_count(const FixedLayerPolicy& policy, int node_depth, int p);
bool variable_allowed(const FixedLayerPolicy& policy, int node_depth, int variable, int p);

// Depth-split prior. change_prior=false: alpha*(1+d)^-beta. change_prior=true:
// alpha inside the fixed layers, alpha*(1+d-h)^-beta below them.
double split_probability(const FixedLayerPolicy& policy, int node_depth, double alpha,
                         double beta);

// Legality of a structurally valid move under the policy. Swap is judged
// post-exchange at both positions; Prune keys on the depth of the node that
// reverts to a leaf.
bool move_legal(const FixedLayerPolicy& policy, const Tree& tree, const Move& move);

}  // namespace pfbart
