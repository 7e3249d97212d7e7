#pragma once

#include <cstdint>
#include <memory_resource>
#include <vector>

#include "kbest/algebra.hpp"
#include "kbest/automaton.hpp"
#include "kbest/structures.hpp"

namespace kbest {

enum class Polarity : std::uint8_t { Forced, Excluded };

inline constexpr std::uint32_t kNoId = UINT32_MAX;

/// How one ranked entry was obtained. Inner nodes: index into the state's
/// fitting pairs and the ranks (1 or 2) taken from each child. Leaves: index
/// of the solution in the leaf's value-sorted solution list.
struct Choice {
  std::uint32_t pair = 0;
  std::uint8_t r1 = 0, r2 = 0;
};

struct Entry {
  Weight best = kInf;
  Weight second = kInf;
  Choice choice[2];
  std::uint32_t id[2] = {kNoId, kNoId};  // solution ids per rank

  Weight value(int rank) const { return rank == 1 ? best : second; }
};

/// Immutable evaluation-tree node; shared between versions.
struct EvalNode {
  const EvalNode* child[2] = {nullptr, nullptr};
  NodeId parse = kNoNode;
  std::uint32_t n_states = 0;
  const Entry* entries = nullptr;
  // Leaves only: per state, the still-allowed solutions as ascending
  // positions in the leaf's value-sorted list.
  const std::uint32_t* list_begin = nullptr;  // n_states + 1 offsets into list
  const std::uint32_t* list = nullptr;
};

struct Constraint {
  FeatureId feature;
  int var = 0;
  Polarity polarity = Polarity::Forced;
};

struct ConstraintLink {
  Constraint c;
  const ConstraintLink* next = nullptr;
};

/// One subproblem: the root of its evaluation tree plus the constraints that
/// define it (kept for diagnostics; the tree already encodes them).
struct Version {
  const EvalNode* root = nullptr;
  const ConstraintLink* constraints = nullptr;
  std::vector<Constraint> constraint_list() const;
};

struct PathStep {
  const EvalNode* node = nullptr;
  int dir = -1;  // child followed; -1 at the leaf
  std::uint32_t q[2] = {0, 0};  // tracked states of the best and second solution
  std::uint8_t r[2] = {1, 2};   // and their ranks
};

struct PivotReport {
  FeatureId feature;
  int var = 0;
  std::vector<PathStep> path;  // root first, leaf last
  const EvalNode* leaf = nullptr;
  const EvalNode* root = nullptr;
};

/// Top-2 evaluation tree with solution ids, made persistent by path copying.
/// The parse tree, state table and cost model must outlive the engine.
class EvaluationEngine {
 public:
  EvaluationEngine(const ParseTree& t, const StateTable& st, const CostModel& c);
  EvaluationEngine(const EvaluationEngine&) = delete;
  EvaluationEngine& operator=(const EvaluationEngine&) = delete;

  Version initial() const { return {&nodes_[t_.root()], nullptr}; }

  /// (best, second) at the accepting root state; (inf, inf) if infeasible.
  Top2Value best_pair(const Version& v) const;

  /// Solution denoted by (state, rank) at a node; throws if its value is infinite.
  Solution reconstruct(const EvalNode* node, std::uint32_t q, int rank) const;
  Solution reconstruct(const Version& v, int rank) const;

  /// Requires best_pair(v).second < inf.
  PivotReport pivot_query(const Version& v) const;

  /// New version whose solutions are those of v satisfying the constraint.
  /// Copies exactly the nodes on the report's path.
  Version constrain(const Version& v, const PivotReport& p, Polarity polarity);

  std::uint64_t nodes_copied() const { return copied_; }
  std::uint32_t root_state() const { return static_cast<std::uint32_t>(st_.root_state()); }
  const ParseTree& parse_tree() const { return t_; }
  const StateTable& state_table() const { return st_; }

  /// Leaf solution at a position of the leaf's value-sorted list.
  std::uint32_t leaf_mask(NodeId leaf, std::uint32_t pos) const { return sorted_masks_[leaf_off_[leaf] + pos]; }
  Weight leaf_value(NodeId leaf, std::uint32_t pos) const { return sorted_values_[leaf_off_[leaf] + pos]; }

 private:
  struct Preferred {
    std::uint32_t q;
    Choice choice;
  };

  void eval_leaf(NodeId u, std::uint32_t n_states, const std::uint32_t* begin, const std::uint32_t* list,
                 Entry* out, const Preferred* pref) const;
  void eval_inner(NodeId u, const EvalNode* c0, const EvalNode* c1, Entry* out, const Preferred* pref) const;
  template <class T>
  T* alloc(std::size_t n);

  const ParseTree& t_;
  const StateTable& st_;
  const CostModel& c_;

  std::vector<EvalNode> nodes_;  // initial version, indexed by parse node
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> leaf_off_;      // per node, into the sorted leaf pools
  std::vector<std::uint32_t> sorted_masks_;
  std::vector<Weight> sorted_values_;
  std::vector<std::uint32_t> list_begin_;    // initial leaf lists
  std::vector<std::uint32_t> lists_;

  std::pmr::monotonic_buffer_resource arena_;
  std::uint64_t copied_ = 0;
};

}  // namespace kbest
