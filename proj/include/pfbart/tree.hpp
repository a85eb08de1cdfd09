#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pfbart/matrix.hpp"

namespace pfbart {

// Nodes are addressed by heap id: root is 1, the children of node k are 2k
// (left) and 2k+1 (right). Ids encode the root path, so they are stable
// across value edits and comparable across trees of any shape.
using NodeId = std::uint64_t;

constexpr NodeId kRootId = 1;

struct SplitRule {
  int variable = -1;   // 0-based covariate index
  double cutpoint = 0.0;

  bool operator==(const SplitRule&) const = default;
};

enum class MoveType { Grow, Prune, Swap, Change };

// Grow targets a leaf; Prune an internal node with two leaf children; Swap a
// parent/child pair of internal nodes; Change an internal node.
struct Move {
  MoveType type = MoveType::Grow;
  NodeId target = kRootId;
  NodeId swap_child = 0;  // Swap only
  SplitRule rule;         // Grow / Change only
};

// Binary regression tree. A value type: structural edits go through
// apply_move and return a fresh tree, leaf values may be rewritten in place
// on an owned copy. Rows route left when x[variable] <= cutpoint.
class Tree {
 public:
  Tree();                     // single leaf, mu = 0
  explicit Tree(double mu);   // single leaf

  static int depth_of(NodeId id) { return std::bit_width(id) - 1; }
  static NodeId parent_of(NodeId id) { return id >> 1; }
  static NodeId left_of(NodeId id) { return id << 1; }
  static NodeId right_of(NodeId id) { return (id << 1) | 1; }
  // True when `a` lies on the root path of `b` (or equals it).
  static bool is_ancestor(NodeId a, NodeId b);

  // Sentinel carried by freshly grown or collapsed leaves until the next
  // leaf-value draw. Evaluating such a tree is an error.
  static double unset_mu();
  static bool is_unset(double mu);

  bool contains(NodeId id) const { return index_of(id) >= 0; }
  bool is_leaf(NodeId id) const;      // throws if absent
  bool is_internal(NodeId id) const;  // throws if absent
  const SplitRule& rule(NodeId id) const;
  double leaf_value(NodeId id) const;
  void set_leaf_value(NodeId id, double mu);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_leaves() const;
  int num_internal() const { return num_nodes() - num_leaves(); }

  std::vector<NodeId> leaf_ids() const;      // ascending
  std::vector<NodeId> internal_ids() const;  // ascending
  // Internal nodes whose children are both leaves (prune candidates).
  std::vector<NodeId> prunable_ids() const;  // ascending
  // Parent/child pairs of internal nodes (swap candidates), ascending by
  // (parent, child).
  std::vector<std::pair<NodeId, NodeId>> internal_pairs() const;

  double evaluate(std::span<const double> x) const;
  NodeId route(std::span<const double> x) const;
  // Route starting below an arbitrary node; x must reach a leaf.
  NodeId route_from(NodeId start, std::span<const double> x) const;

  bool has_unset_leaf() const;

  // Preorder traversal: f(NodeId, depth, is_leaf, rule-or-null, mu).
  template <class F>
  void for_each(F&& f) const {
    walk(0, kRootId, f);
  }

  bool operator==(const Tree& other) const;

 private:
  struct Node {
    SplitRule rule;
    double mu = 0.0;
    std::int32_t left = -1, right = -1;  // both -1 for a leaf
    bool leaf() const { return left < 0; }
  };

  std::vector<Node> nodes_;  // preorder-compact; nodes_[0] is root

  int index_of(NodeId id) const;
  int checked_index(NodeId id) const;  // throws when absent

  template <class F>
  void walk(int idx, NodeId id, F& f) const {
    const Node& nd = nodes_[idx];
    f(id, depth_of(id), nd.leaf(), nd.leaf() ? nullptr : &nd.rule, nd.mu);
    if (!nd.leaf()) {
      walk(nd.left, left_of(id), f);
      walk(nd.right, right_of(id), f);
    }
  }

  friend Tree apply_move(const Tree&, const Move&);
};

// Pure structural editor. Legality under a fixed-layer policy is the
// constraints module's concern; a structurally invalid move here signals a
// sampler bug and throws.
Tree apply_move(const Tree& tree, const Move& move);

// Rows of X bucketed by the leaf they route to. Leaves with no rows keep an
// empty bucket, so `leaves` always lists every leaf of the tree (ascending)
// and the buckets partition {0..n-1}.
struct LeafPartition {
  std::vector<NodeId> leaves;
  std::vector<std::vector<int>> rows;

  int leaf_pos(NodeId id) const;  // index into leaves/rows; -1 if absent
};

LeafPartition leaf_partition(const Tree& tree, const Matrix& X);

}  // namespace pfbart
