#include "pfbart/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pfbart {

void FixedLayerPolicy::validate(int p) const {
  std::vector<int> seen;
  for (int v : fixed_vars) {
    if (v < 0 || v >= p)
      throw std::invalid_argument("policy: fixed variable index " + std::to_string(v) +
                                  " out of range for p=" + std::to_string(p));
    if (std::find(seen.begin(), seen.end(), v) != seen.end())
      throw std::invalid_argument("policy: fixed variable " + std::to_string(v) +
                                  " listed twice");
    seen.push_back(v);
  }
}

std::vector<int> allowed_variables(const FixedLayerPolicy& policy, int node_depth, int p) {
  if (node_depth >= policy.depth()) {
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  if (!policy.swap_flag) return {policy.fixed_vars[node_depth]};
  return policy.fixed_vars;
}

int allowed_count(const FixedLayerPolicy& policy, int node_depth, int p) {
  if (node_depth >= policy.depth()) return p;
  return policy.swap_flag ? policy.depth() : 1;
}

bool variable_allowed(const FixedLayerPolicy& policy, int node_depth, int variable, int p) {
  if (node_depth >= policy.depth()) return variable >= 0 && variable < p;
  if (!policy.swap_flag) return variable == policy.fixed_vars[node_depth];
  return std::find(policy.fixed_vars.begin(), policy.fixed_vars.end(), variable) !=
         policy.fixed_vars.end();
}

double split_probability(const FixedLayerPolicy& policy, int node_depth, double alpha,
                         double beta) {
  const int h = policy.depth();
  if (!policy.change_prior) return alpha * std::pow(1.0 + node_depth, -beta);
  if (node_depth < h) return alpha;  // fixed layers split like the root
  return alpha * std::pow(1.0 + node_depth - h, -beta);
}

bool move_legal(const FixedLayerPolicy& policy, const Tree& tree, const Move& move) {
  const int p_any = 1 << 30;  // grow/change carry an explicit variable; range is
                              // the caller's concern, membership is ours
  switch (move.type) {
    case MoveType::Grow:
      return variable_allowed(policy, Tree::depth_of(move.target), move.rule.variable, p_any);
    case MoveType::Prune:
      return policy.allow_prune || Tree::depth_of(move.target) >= policy.depth();
    case MoveType::Swap: {
      const int parent_depth = Tree::depth_of(move.target);
      const int child_depth = Tree::depth_of(move.swap_child);
      const int parent_var = tree.rule(move.target).variable;
      const int child_var = tree.rule(move.swap_child).variable;
      // After the exchange the child's variable sits at the parent's depth
      // and vice versa; both must be allowed where they land.
      return variable_allowed(policy, parent_depth, child_var, p_any) &&
             variable_allowed(policy, child_depth, parent_var, p_any);
    }
    case MoveType::Change:
      return variable_allowed(policy, Tree::depth_of(move.target), move.rule.variable, p_any);
  }
  return false;
}

}  // namespace pfbart
