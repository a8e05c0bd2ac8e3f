#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "nfr/error.hpp"

namespace nfr {

inline constexpr int kDefaultMaxGenerations = 6;

// Number of ordered trees of generation J: 1 * 3 * 5 * ... * (2J - 1).
inline long long ordered_tree_count(int J) {
  long long c = 1;
  for (int j = 1; j <= J; ++j) c *= 2 * j - 1;
  return c;
}

struct TreeNode {
  int parent = -1;
  std::array<int, 3> children{-1, -1, -1};
  int gen = 0;          // generation in which the node received children; 0 while terminal
  bool conj = false;    // the node's value enters conjugated (NLS bookkeeping)
};

struct GenerationView {
  int j = 0;
  int root = -1;
  std::array<int, 3> children{-1, -1, -1};
  std::vector<int> essential_terminals;
};

// A ternary tree together with the order in which its nodes were expanded.
// Node ids are dense and assigned in expansion order: the root is 0 and the
// children of the j-th expanded node are 3j-2, 3j-1, 3j.
class OrderedTree {
 public:
  static OrderedTree first_generation() {
    OrderedTree t;
    t.nodes_.push_back(TreeNode{});
    t.expand(0);
    return t;
  }

  OrderedTree grow(int terminal) const {
    if (!valid(terminal) || !is_terminal(terminal))
      throw Error(ErrorKind::InvalidIndex, "only terminal nodes can be grown");
    OrderedTree t = *this;
    t.expand(terminal);
    return t;
  }

  int generations() const { return static_cast<int>(roots_.size()); }
  std::size_t node_count() const { return nodes_.size(); }
  const TreeNode& node(int a) const { return nodes_.at(static_cast<std::size_t>(a)); }
  bool valid(int a) const { return a >= 0 && static_cast<std::size_t>(a) < nodes_.size(); }
  bool is_terminal(int a) const { return node(a).gen == 0; }
  int root() const { return 0; }

  // r^{(j)}, j = 1..J.
  int generation_root(int j) const {
    check_generation(j, generations());
    return roots_[static_cast<std::size_t>(j - 1)];
  }

  // p^{(j)}, the terminal of the j-th tree that is expanded in step j+1.
  int grown_node(int j) const {
    check_generation(j, generations() - 1);
    return roots_[static_cast<std::size_t>(j)];
  }

  // Terminal nodes read left to right in the planar picture.
  std::vector<int> terminals() const {
    std::vector<int> out;
    collect_terminals(0, out);
    return out;
  }

  int terminal_slot(int a) const {
    auto ts = terminals();
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ts[i] == a) return static_cast<int>(i);
    throw Error(ErrorKind::InvalidIndex, "node is not terminal");
  }

  std::size_t terminal_count() const {
    std::size_t c = 0;
    for (const auto& nd : nodes_) c += nd.gen == 0;
    return c;
  }

  GenerationView projection(int j) const {
    check_generation(j, generations());
    GenerationView v;
    v.j = j;
    v.root = generation_root(j);
    v.children = node(v.root).children;
    for (int c : v.children)
      if (is_terminal(c)) v.essential_terminals.push_back(c);
    return v;
  }

  // Position (1, 2 or 3) of p^{(j)} among the children of its parent.
  int order_of(int j) const {
    int p = grown_node(j);
    const auto& ch = node(node(p).parent).children;
    for (int l = 0; l < 3; ++l)
      if (ch[static_cast<std::size_t>(l)] == p) return l + 1;
    throw Error(ErrorKind::InvalidIndex, "corrupt tree");
  }

  // Walk from a back to the root through the generation roots that own each
  // node in turn; every parent of a node is a generation root.
  std::vector<int> shortest_path(int a) const {
    if (!valid(a)) throw Error(ErrorKind::InvalidIndex, "unknown node");
    std::vector<int> path{a};
    while (path.back() != 0) path.push_back(node(path.back()).parent);
    return {path.rbegin(), path.rend()};
  }

  std::set<int> path_generation_set(int p) const {
    if (!valid(p) || !is_terminal(p)) throw Error(ErrorKind::InvalidIndex, "path target must be terminal");
    std::set<int> gens;
    for (int a : shortest_path(p))
      if (!is_terminal(a)) gens.insert(node(a).gen);
    return gens;
  }

  bool operator==(const OrderedTree& o) const {
    if (roots_ != o.roots_ || nodes_.size() != o.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].parent != o.nodes_[i].parent || nodes_[i].children != o.nodes_[i].children ||
          nodes_[i].gen != o.nodes_[i].gen || nodes_[i].conj != o.nodes_[i].conj)
        return false;
    return true;
  }

  // Compact structural signature, e.g. "0.2.1" lists the grown terminal slot per step.
  const std::vector<int>& growth_slots() const { return growth_slots_; }

 private:
  void expand(int a) {
    auto& nd = nodes_[static_cast<std::size_t>(a)];
    if (a != 0) growth_slots_.push_back(terminal_slot(a));
    int first = static_cast<int>(nodes_.size());
    bool c = nd.conj;
    nd.gen = static_cast<int>(roots_.size()) + 1;
    nd.children = {first, first + 1, first + 2};
    roots_.push_back(a);
    for (int l = 0; l < 3; ++l) {
      TreeNode child;
      child.parent = a;
      child.conj = (l == 1) ? !c : c;
      nodes_.push_back(child);
    }
  }

  void collect_terminals(int a, std::vector<int>& out) const {
    const auto& nd = node(a);
    if (nd.gen == 0) {
      out.push_back(a);
      return;
    }
    for (int c : nd.children) collect_terminals(c, out);
  }

  static void check_generation(int j, int hi) {
    if (j < 1 || j > hi) throw Error(ErrorKind::InvalidIndex, "generation index out of range");
  }

  std::vector<TreeNode> nodes_;
  std::vector<int> roots_;
  std::vector<int> growth_slots_;
};

// All ordered trees of generation J, lexicographic in the grown terminal slot per step.
inline std::vector<OrderedTree> enumerate_ordered_trees(int J, int max_generations = kDefaultMaxGenerations) {
  if (J < 1) throw Error(ErrorKind::InvalidArgument, "generation count must be positive");
  if (J > max_generations)
    throw Error(ErrorKind::ResourceLimit,
                "tree enumeration limited to " + std::to_string(max_generations) + " generations");
  std::vector<OrderedTree> level{OrderedTree::first_generation()};
  for (int j = 2; j <= J; ++j) {
    std::vector<OrderedTree> next;
    next.reserve(level.size() * static_cast<std::size_t>(2 * j - 1));
    for (const auto& t : level)
      for (int a : t.terminals()) next.push_back(t.grow(a));
    level = std::move(next);
  }
  return level;
}

}  // namespace nfr
