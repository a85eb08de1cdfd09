#include "doctest.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "pfbart/rng.hpp"
#include "pfbart/tree.hpp"

using namespace pfbart;

namespace {

// Root split on var 0 at 0.5; left child splits on var 1 at 0.5. Four-leaf
// quadrant tree used by several cases:
//        [x0<=0.5]
//        /        \
//   [x1<=0.5]   [x1<=0.5]
//    /    \       /    \
//   1.0   2.0    3.0   4.0
Tree quadrant_tree() {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  t = apply_move(t, Move{MoveType::Grow, 2, 0, SplitRule{1, 0.5}});
  t = apply_move(t, Move{MoveType::Grow, 3, 0, SplitRule{1, 0.5}});
  t.set_leaf_value(4, 1.0);
  t.set_leaf_value(5, 2.0);
  t.set_leaf_value(6, 3.0);
  t.set_leaf_value(7, 4.0);
  return t;
}

Matrix matrix_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.begin()->size());
  Matrix m(n, p);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Uniform random tree built from legal grows only; every mu set.
Tree random_tree(Rng& rng, int p, int max_grows) {
  Tree t(0.0);
  for (int g = 0; g < max_grows; ++g) {
    const auto leaves = t.leaf_ids();
    const NodeId leaf = leaves[rng.uniform_int(leaves.size())];
    const int var = static_cast<int>(rng.uniform_int(p));
    t = apply_move(t, Move{MoveType::Grow, leaf, 0, SplitRule{var, rng.uniform()}});
    t.set_leaf_value(Tree::left_of(leaf), rng.normal(0, 1));
    t.set_leaf_value(Tree::right_of(leaf), rng.normal(0, 1));
  }
  return t;
}

}  // namespace

TEST_CASE("single-leaf tree returns its mu for any input") {
  Tree t(3.5);
  const double x1[] = {0.0};
  const double x2[] = {12.0, -4.0, 7.0};
  CHECK(t.evaluate(x1) == 3.5);
  CHECK(t.evaluate(x2) == 3.5);
  CHECK(t.num_leaves() == 1);
  CHECK(t.num_internal() == 0);
}

TEST_CASE("boundary input routes left") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  t.set_leaf_value(2, 1.0);
  t.set_leaf_value(3, 2.0);
  const double at_cut[] = {0.5, 99.0};
  const double above[] = {0.5000001, 99.0};
  CHECK(t.evaluate(at_cut) == 1.0);
  CHECK(t.evaluate(above) == 2.0);
}

TEST_CASE("quadrant tree reaches all four leaves") {
  const Tree t = quadrant_tree();
  // Expected values enumerated by hand from the routing rule (<= goes left).
  const double ll[] = {0.2, 0.2};
  const double lr[] = {0.2, 0.8};
  const double rl[] = {0.8, 0.2};
  const double rr[] = {0.8, 0.8};
  CHECK(t.evaluate(ll) == 1.0);
  CHECK(t.evaluate(lr) == 2.0);
  CHECK(t.evaluate(rl) == 3.0);
  CHECK(t.evaluate(rr) == 4.0);
  CHECK(t.num_leaves() == 4);
  CHECK(t.num_internal() == 3);
}

TEST_CASE("evaluate rejects inputs missing a split variable") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{1, 0.5}});
  t.set_leaf_value(2, 0.0);
  t.set_leaf_value(3, 0.0);
  const double short_x[] = {0.3};
  CHECK_THROWS_AS(t.evaluate(std::span<const double>(short_x, 1)), std::invalid_argument);
}

TEST_CASE("evaluating an unset leaf is an error") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  CHECK(t.has_unset_leaf());
  const double x[] = {0.2};
  CHECK_THROWS_AS(t.evaluate(x), std::logic_error);
}

TEST_CASE("leaf_partition: single leaf holds all rows") {
  Tree t(1.0);
  const auto X = matrix_from({{0.1}, {0.2}, {0.3}, {0.4}, {0.5}});
  const auto part = leaf_partition(t, X);
  REQUIRE(part.leaves.size() == 1);
  CHECK(part.rows[0] == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("leaf_partition: root split sends rows by the rule") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  const auto X = matrix_from({{0.2}, {0.8}});
  const auto part = leaf_partition(t, X);
  REQUIRE(part.leaves == std::vector<NodeId>{2, 3});
  CHECK(part.rows[0] == std::vector<int>{0});
  CHECK(part.rows[1] == std::vector<int>{1});
}

TEST_CASE("leaf_partition agrees with per-row routing on random trees") {
  Rng rng(20240601, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 3;
    const Tree t = random_tree(rng, p, 7);
    Matrix X(100, p);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = rng.uniform();
    const auto part = leaf_partition(t, X);

    // Disjoint and exhaustive.
    std::set<int> seen;
    for (const auto& rows : part.rows)
      for (int r : rows) CHECK(seen.insert(r).second);
    CHECK(seen.size() == 100);

    // Identical to evaluate-style routing.
    for (std::size_t k = 0; k < part.leaves.size(); ++k)
      for (int r : part.rows[k]) CHECK(t.route(X.row(r)) == part.leaves[k]);
  }
}

TEST_CASE("grow then prune restores the original topology") {
  Tree t(3.5);
  const Tree grown = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  CHECK(grown.num_internal() == 1);
  CHECK(grown.num_leaves() == 2);
  const Tree pruned = apply_move(grown, Move{MoveType::Prune, kRootId, 0, SplitRule{}});
  CHECK(pruned.num_leaves() == 1);
  CHECK(pruned.num_internal() == 0);
  CHECK(pruned.has_unset_leaf());  // mu is redrawn by the sampler, not restored
}

TEST_CASE("swap exchanges rules and is an involution") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.25}});
  t = apply_move(t, Move{MoveType::Grow, 2, 0, SplitRule{1, 0.75}});
  t.set_leaf_value(3, 0.0);
  t.set_leaf_value(4, 0.0);
  t.set_leaf_value(5, 0.0);

  const Move swap{MoveType::Swap, kRootId, 2, SplitRule{}};
  const Tree once = apply_move(t, swap);
  CHECK(once.rule(kRootId) == SplitRule{1, 0.75});
  CHECK(once.rule(2) == SplitRule{0, 0.25});
  const Tree twice = apply_move(once, swap);
  CHECK(twice == t);
}

TEST_CASE("change with the original rule is the identity") {
  Tree t;
  t = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  t.set_leaf_value(2, 1.0);
  t.set_leaf_value(3, 2.0);
  const Tree same = apply_move(t, Move{MoveType::Change, kRootId, 0, SplitRule{0, 0.5}});
  CHECK(same == t);
}

TEST_CASE("apply_move rejects missing or mismatched targets") {
  Tree t(0.0);
  CHECK_THROWS_AS(apply_move(t, Move{MoveType::Prune, kRootId, 0, SplitRule{}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_move(t, Move{MoveType::Grow, 2, 0, SplitRule{0, 0.5}}),
                  std::invalid_argument);
  Tree grown = apply_move(t, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}});
  CHECK_THROWS_AS(apply_move(grown, Move{MoveType::Grow, kRootId, 0, SplitRule{0, 0.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_move(grown, Move{MoveType::Swap, kRootId, 2, SplitRule{}}),
                  std::invalid_argument);
  // Prune target whose children are not both leaves.
  grown = apply_move(grown, Move{MoveType::Grow, 2, 0, SplitRule{0, 0.25}});
  CHECK_THROWS_AS(apply_move(grown, Move{MoveType::Prune, kRootId, 0, SplitRule{}}),
                  std::invalid_argument);
}

TEST_CASE("leaf count stays internals plus one across random move sequences") {
  Rng rng(7, 0);
  for (int trial = 0; trial < 10; ++trial) {
    Tree t = random_tree(rng, 2, 6);
    for (int step = 0; step < 30; ++step) {
      const double u = rng.uniform();
      if (u < 0.4) {
        const auto leaves = t.leaf_ids();
        const NodeId leaf = leaves[rng.uniform_int(leaves.size())];
        t = apply_move(t, Move{MoveType::Grow, leaf, 0,
                               SplitRule{static_cast<int>(rng.uniform_int(2)), rng.uniform()}});
      } else if (u < 0.7) {
        const auto nogs = t.prunable_ids();
        if (nogs.empty()) continue;
        t = apply_move(t, Move{MoveType::Prune, nogs[rng.uniform_int(nogs.size())], 0, {}});
      } else if (u < 0.85) {
        const auto pairs = t.internal_pairs();
        if (pairs.empty()) continue;
        const auto [a, b] = pairs[rng.uniform_int(pairs.size())];
        t = apply_move(t, Move{MoveType::Swap, a, b, SplitRule{}});
      } else {
        const auto internals = t.internal_ids();
        if (internals.empty()) continue;
        t = apply_move(t, Move{MoveType::Change, internals[rng.uniform_int(internals.size())],
                               0, SplitRule{static_cast<int>(rng.uniform_int(2)), rng.uniform()}});
      }
      CHECK(t.num_leaves() == t.num_internal() + 1);
    }
  }
}

TEST_CASE("routing totality on random trees and inputs") {
  Rng rng(99, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Tree t = random_tree(rng, 4, 8);
    const auto leaves = t.leaf_ids();
    for (int i = 0; i < 50; ++i) {
      double x[4] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
      const NodeId leaf = t.route(x);
      CHECK(t.is_leaf(leaf));
      CHECK(std::count(leaves.begin(), leaves.end(), leaf) == 1);
    }
  }
}

TEST_CASE("moves do not mutate the source tree") {
  const Tree t = quadrant_tree();
  const Tree copy = t;
  (void)apply_move(t, Move{MoveType::Prune, 2, 0, SplitRule{}});
  (void)apply_move(t, Move{MoveType::Change, kRootId, 0, SplitRule{1, 0.9}});
  CHECK(t == copy);
}
