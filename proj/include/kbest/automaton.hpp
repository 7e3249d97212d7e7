#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbest/algebra.hpp"
#include "kbest/graph.hpp"

namespace kbest {

/// Opaque automaton state; automata choose their own byte encoding.
using State = std::string;

/// A problem automaton in forward form: a state per (node, solution) computed
/// bottom-up. The fitting pairs of a state are the child-state pairs that map
/// to it, which makes the fitting pair of each solution unique by construction.
class Automaton {
 public:
  virtual ~Automaton() = default;

  virtual std::string name() const = 0;
  virtual std::vector<FeatureKind> var_types() const = 0;
  int n_free() const { return static_cast<int>(var_types().size()); }

  struct LeafState {
    State state;
    std::vector<Solution> solutions;
  };
  /// Non-empty states of a constant node with their explicit solution sets.
  /// Solutions may only mention the feature the leaf introduces.
  virtual std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const = 0;

  /// State of a combined solution at inner node u, or nullopt if no extension
  /// of it can be accepted.
  virtual std::optional<State> combine(const ParseTree& t, NodeId u, const State& left,
                                       const State& right) const = 0;

  /// Accepting state at the (order-0) root.
  virtual State root_state() const = 0;

  /// Human-readable state, for dumps and test failure messages.
  virtual std::string describe(const State& q) const;
};

struct FittingPair {
  std::uint32_t left;   // state index at child[0]
  std::uint32_t right;  // state index at child[1]
};

/// The relevant states of every parse node with their fitting pairs, and the
/// leaf solution tables. A leaf's solutions are stored as bit masks over the
/// free variables: bit v set means the leaf's feature is in set v.
class StateTable {
 public:
  static StateTable build(const ParseTree& t, const Automaton& a);

  int n_free() const { return n_free_; }
  int num_states(NodeId u) const { return static_cast<int>(state_begin_[u + 1] - state_begin_[u]); }
  std::size_t total_states() const { return state_begin_.back(); }
  std::size_t total_pairs() const { return pairs_.size(); }
  int max_states() const { return max_states_; }

  /// Fitting pairs of local state q at inner node u, ordered by (left, right).
  std::span<const FittingPair> pairs(NodeId u, int q) const {
    std::size_t g = state_begin_[u] + q;
    return {pairs_.data() + pair_begin_[g], pair_begin_[g + 1] - pair_begin_[g]};
  }

  /// Distinct solution masks of leaf u, ascending.
  std::span<const std::uint32_t> leaf_masks(NodeId u) const {
    return {masks_.data() + mask_begin_[u], mask_begin_[u + 1] - mask_begin_[u]};
  }
  /// Solutions of state q at leaf u as indices into leaf_masks(u), ascending.
  std::span<const std::uint32_t> leaf_state_solutions(NodeId u, int q) const {
    std::size_t g = state_begin_[u] + q;
    return {sol_index_.data() + sol_begin_[g], sol_begin_[g + 1] - sol_begin_[g]};
  }

  /// Local index of the accepting state at the root, or -1 if nothing is accepted.
  int root_state() const { return root_state_; }

  /// Feature a leaf's masks refer to (edge for ConstEdge, vertex for introducing Const1).
  static std::optional<FeatureId> leaf_feature(const ParseTree& t, NodeId u);
  static Solution mask_solution(std::uint32_t mask, FeatureId x, int n_free);

  /// State names; only kept when requested at build time.
  const std::vector<std::vector<State>>& names() const { return names_; }
  static StateTable build_with_names(const ParseTree& t, const Automaton& a);

 private:
  static StateTable build_impl(const ParseTree& t, const Automaton& a, bool keep_names);

  int n_free_ = 0;
  int root_state_ = -1;
  int max_states_ = 0;
  std::vector<std::size_t> state_begin_;  // per node, size nodes + 1
  std::vector<std::size_t> pair_begin_;   // per global state, size states + 1
  std::vector<FittingPair> pairs_;
  std::vector<std::size_t> mask_begin_;   // per node
  std::vector<std::uint32_t> masks_;
  std::vector<std::size_t> sol_begin_;    // per global state
  std::vector<std::uint32_t> sol_index_;
  std::vector<std::vector<State>> names_;
};

/// Value of a leaf solution mask under a cost model.
Weight mask_value(std::uint32_t mask, std::optional<FeatureId> x, const CostModel& c);

}  // namespace kbest
