#include "pfbart/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pfbart {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

Tree::Tree() : nodes_(1) {}

Tree::Tree(double mu) : nodes_(1) { nodes_[0].mu = mu; }

bool Tree::is_ancestor(NodeId a, NodeId b) {
  if (a > b) return false;
  while (b > a) b >>= 1;
  return b == a;
}

double Tree::unset_mu() { return std::numeric_limits<double>::quiet_NaN(); }

bool Tree::is_unset(double mu) { return std::isnan(mu); }

int Tree::index_of(NodeId id) const {
  if (id == 0) return -1;
  int idx = 0;
  for (int b = std::bit_width(id) - 2; b >= 0; --b) {
    const Node& nd = nodes_[idx];
    if (nd.leaf()) return -1;
    idx = ((id >> b) & 1) ? nd.right : nd.left;
  }
  return idx;
}

int Tree::checked_index(NodeId id) const {
  const int idx = index_of(id);
  if (idx < 0) fail("tree: no node with id " + std::to_string(id));
  return idx;
}

bool Tree::is_leaf(NodeId id) const { return nodes_[checked_index(id)].leaf(); }

bool Tree::is_internal(NodeId id) const { return !nodes_[checked_index(id)].leaf(); }

const SplitRule& Tree::rule(NodeId id) const {
  const Node& nd = nodes_[checked_index(id)];
  if (nd.leaf()) fail("tree: node " + std::to_string(id) + " is a leaf, has no rule");
  return nd.rule;
}

double Tree::leaf_value(NodeId id) const {
  const Node& nd = nodes_[checked_index(id)];
  if (!nd.leaf()) fail("tree: node " + std::to_string(id) + " is internal, has no mu");
  return nd.mu;
}

void Tree::set_leaf_value(NodeId id, double mu) {
  Node& nd = nodes_[checked_index(id)];
  if (!nd.leaf()) fail("tree: node " + std::to_string(id) + " is internal, has no mu");
  nd.mu = mu;
}

int Tree::num_leaves() const {
  int k = 0;
  for (const Node& nd : nodes_) k += nd.leaf() ? 1 : 0;
  return k;
}

std::vector<NodeId> Tree::leaf_ids() const {
  std::vector<NodeId> out;
  for_each([&](NodeId id, int, bool leaf, const SplitRule*, double) {
    if (leaf) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> Tree::internal_ids() const {
  std::vector<NodeId> out;
  for_each([&](NodeId id, int, bool leaf, const SplitRule*, double) {
    if (!leaf) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> Tree::prunable_ids() const {
  std::vector<NodeId> out;
  for (NodeId id : internal_ids()) {
    const Node& nd = nodes_[index_of(id)];
    if (nodes_[nd.left].leaf() && nodes_[nd.right].leaf()) out.push_back(id);
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> Tree::internal_pairs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId id : internal_ids()) {
    const Node& nd = nodes_[index_of(id)];
    if (!nodes_[nd.left].leaf()) out.emplace_back(id, left_of(id));
    if (!nodes_[nd.right].leaf()) out.emplace_back(id, right_of(id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double Tree::evaluate(std::span<const double> x) const {
  int idx = 0;
  for (;;) {
    const Node& nd = nodes_[idx];
    if (nd.leaf()) {
      if (is_unset(nd.mu)) throw std::logic_error("tree: evaluated a leaf with unset mu");
      return nd.mu;
    }
    if (nd.rule.variable >= static_cast<int>(x.size()))
      fail("tree: input has dimension " + std::to_string(x.size()) +
           ", split needs variable " + std::to_string(nd.rule.variable));
    idx = x[nd.rule.variable] <= nd.rule.cutpoint ? nd.left : nd.right;
  }
}

NodeId Tree::route(std::span<const double> x) const { return route_from(kRootId, x); }

NodeId Tree::route_from(NodeId start, std::span<const double> x) const {
  int idx = checked_index(start);
  NodeId id = start;
  for (;;) {
    const Node& nd = nodes_[idx];
    if (nd.leaf()) return id;
    if (nd.rule.variable >= static_cast<int>(x.size()))
      fail("tree: input has dimension " + std::to_string(x.size()) +
           ", split needs variable " + std::to_string(nd.rule.variable));
    const bool left = x[nd.rule.variable] <= nd.rule.cutpoint;
    idx = left ? nd.left : nd.right;
    id = left ? left_of(id) : right_of(id);
  }
}

bool Tree::has_unset_leaf() const {
  for (const Node& nd : nodes_)
    if (nd.leaf() && is_unset(nd.mu)) return true;
  return false;
}

bool Tree::operator==(const Tree& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  // Both trees are preorder-compact, so positional comparison is structural.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& a = nodes_[i];
    const Node& b = other.nodes_[i];
    if (a.leaf() != b.leaf()) return false;
    if (a.leaf()) {
      const bool both_unset = is_unset(a.mu) && is_unset(b.mu);
      if (!both_unset && a.mu != b.mu) return false;
    } else {
      if (!(a.rule == b.rule)) return false;
    }
  }
  return true;
}

Tree apply_move(const Tree& tree, const Move& move) {
  Tree out = tree;  // preorder layout preserved; edits below keep it compact
  auto& nodes = out.nodes_;

  const int idx = out.index_of(move.target);
  if (idx < 0) fail("apply_move: target " + std::to_string(move.target) + " not in tree");

  switch (move.type) {
    case MoveType::Grow: {
      if (!nodes[idx].leaf()) fail("apply_move: grow target is not a leaf");
      // Splice two fresh leaves in directly after the target to keep the
      // vector preorder-compact.
      Tree::Node leaf;
      leaf.mu = Tree::unset_mu();
      nodes.insert(nodes.begin() + idx + 1, 2, leaf);
      for (auto& nd : nodes) {
        if (nd.left > idx) nd.left += 2;
        if (nd.right > idx) nd.right += 2;
      }
      nodes[idx].rule = move.rule;
      nodes[idx].left = idx + 1;
      nodes[idx].right = idx + 2;
      break;
    }
    case MoveType::Prune: {
      const Tree::Node& nd = nodes[idx];
      if (nd.leaf()) fail("apply_move: prune target is not internal");
      if (!nodes[nd.left].leaf() || !nodes[nd.right].leaf())
        fail("apply_move: prune target has non-leaf children");
      const int l = nd.left, r = nd.right;
      // Children of a prunable node are its two preorder successors; anything
      // else means the compact-layout invariant broke upstream.
      if (l != idx + 1 || r != idx + 2)
        throw std::logic_error("apply_move: tree layout is not preorder-compact");
      nodes[idx].left = nodes[idx].right = -1;
      nodes[idx].mu = Tree::unset_mu();
      nodes.erase(nodes.begin() + l, nodes.begin() + r + 1);
      for (auto& n2 : nodes) {
        if (n2.left > r) n2.left -= 2;
        if (n2.right > r) n2.right -= 2;
      }
      break;
    }
    case MoveType::Swap: {
      if (nodes[idx].leaf()) fail("apply_move: swap parent is not internal");
      if (Tree::parent_of(move.swap_child) != move.target)
        fail("apply_move: swap nodes are not parent and child");
      const int cidx = out.index_of(move.swap_child);
      if (cidx < 0 || nodes[cidx].leaf()) fail("apply_move: swap child is not internal");
      std::swap(nodes[idx].rule, nodes[cidx].rule);
      break;
    }
    case MoveType::Change: {
      if (nodes[idx].leaf()) fail("apply_move: change target is not internal");
      nodes[idx].rule = move.rule;
      break;
    }
  }
  return out;
}

int LeafPartition::leaf_pos(NodeId id) const {
  const auto it = std::lower_bound(leaves.begin(), leaves.end(), id);
  if (it == leaves.end() || *it != id) return -1;
  return static_cast<int>(it - leaves.begin());
}

LeafPartition leaf_partition(const Tree& tree, const Matrix& X) {
  LeafPartition part;
  part.leaves = tree.leaf_ids();
  part.rows.resize(part.leaves.size());
  for (int i = 0; i < X.rows(); ++i) {
    const NodeId leaf = tree.route(X.row(i));
    part.rows[part.leaf_pos(leaf)].push_back(i);
  }
  return part;
}

}  // namespace pfbart
