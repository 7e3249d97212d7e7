#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "kbest/algebra.hpp"
#include "kbest/automaton.hpp"
#include "kbest/engine.hpp"
#include "kbest/graph.hpp"
#include "kbest/problems.hpp"
#include "kbest/treedec.hpp"

namespace kbest {

struct RunStats {
  int td_width = -1;
  int width = -1;  // of the balanced decomposition
  int sd_depth = 0;
  int parse_depth = 0;
  int parse_nodes = 0;
  int max_order = 0;
  int max_states = 0;
  std::size_t total_states = 0;
  std::size_t total_pairs = 0;
  std::int64_t expansions = 0;
  std::int64_t copies_min = 0, copies_max = 0;
  double copies_mean = 0;
  std::int64_t max_path = 0;
  bool exhausted = false;
  bool infeasible = false;
  std::int64_t produced = 0;
  double t_decompose = 0, t_parse = 0, t_states = 0, t_evaluate = 0, t_enumerate = 0;
};

/// Everything needed to enumerate one problem instance. The engine keeps
/// references into the other members, so an Instance is pinned in memory.
class Instance {
 public:
  /// Uses td if given (validated against the graph), otherwise the min-fill heuristic.
  /// For problems other than simple-path the graph's orientation is ignored.
  Instance(const WeightedGraph& g, Problem p, const ProblemParams& params,
           const std::optional<TreeDecomposition>& td = std::nullopt);
  /// Custom automaton (used by tests for multi-variable problems).
  Instance(const WeightedGraph& g, std::unique_ptr<Automaton> a, CostModel cost,
           const std::optional<TreeDecomposition>& td = std::nullopt);
  Instance(const Instance&) = delete;
  Instance& operator=(const Instance&) = delete;

  const WeightedGraph& graph() const { return g_; }
  const ShallowDecomposition& shallow() const { return sd_; }
  const ParseTree& tree() const { return tree_; }
  const Automaton& automaton() const { return *a_; }
  const StateTable& table() const { return table_; }
  const CostModel& cost() const { return cost_; }
  EvaluationEngine& engine() { return *engine_; }
  const RunStats& stats() const { return stats_; }
  RunStats& stats() { return stats_; }

 private:
  void init(const std::optional<TreeDecomposition>& td);

  WeightedGraph g_;
  std::unique_ptr<Automaton> a_;
  CostModel cost_;
  ShallowDecomposition sd_;
  ParseTree tree_;
  StateTable table_;
  std::unique_ptr<EvaluationEngine> engine_;
  RunStats stats_;
};

enum class ExpansionOrder { BestFirst, DepthFirst, Random };

struct KBestOptions {
  bool want_solutions = false;
  ExpansionOrder order = ExpansionOrder::BestFirst;
  std::uint64_t seed = 1;
  /// Called with each created version and the version it came from (tests).
  std::function<void(const Version& child, const Version& parent)> on_version;
};

struct KBestResult {
  std::vector<Weight> values;
  std::vector<Solution> solutions;  // filled when want_solutions
  std::vector<Weight> popped_keys;  // keys in pop order
  std::vector<std::int64_t> copies;  // nodes copied per expansion
};

/// The first min(k, #solutions) values in nondecreasing order. Orders other
/// than best-first explore the whole subproblem tree and sort at the end.
KBestResult k_best(Instance& inst, std::int64_t k, const KBestOptions& opt = {});

/// Values via the top-k evaluation structure, no persistence involved.
std::vector<Weight> k_best_direct(const Instance& inst, int k_fixed);

}  // namespace kbest
