#pragma once

#include <climits>
#include <cstddef>
#include <functional>
#include <vector>

#include "kbest/graph.hpp"
#include "kbest/problems.hpp"

/// Brute-force reference solvers. They only use the graph types, never the
/// decomposition, algebra, automata or evaluation code.
namespace kbest::oracle {

using Predicate = std::function<bool(const Solution&)>;

/// Edge-set predicates read edges as undirected unless stated otherwise.
Predicate simple_path(const WeightedGraph& g, int s, int t);  // respects g.directed
Predicate spanning_tree(const WeightedGraph& g);
Predicate perfect_matching(const WeightedGraph& g);
Predicate vertex_cover(const WeightedGraph& g);

struct Requirement {
  FeatureId feature;
  int var = 0;
  bool forced = true;  // false: excluded
};

struct Ranked {
  Weight value;
  Solution solution;
};

/// Per-variable set size bounds used to prune the subset search.
struct SizeBounds {
  int min_size = 0;
  int max_size = INT_MAX;
};

inline constexpr double kMaxSearchSpace = 16777216.0;  // 2^24

/// All feasible assignments sorted by (value, solution). Throws
/// std::length_error if the search space exceeds 2^24 assignments.
std::vector<Ranked> enumerate_sorted(const WeightedGraph& g, const std::vector<FeatureKind>& var_types,
                                     const Predicate& pred, const std::vector<std::vector<Weight>>& costs,
                                     const std::vector<Requirement>& req = {}, SizeBounds bounds = {});

/// Built-in problem by subset enumeration, with the obvious size bounds.
std::vector<Ranked> solve(Problem p, const WeightedGraph& g, const ProblemParams& params,
                          const std::vector<Requirement>& req = {});

/// Simple s-t paths by depth-first search. Throws std::length_error beyond limit paths.
std::vector<Ranked> enumerate_paths(const WeightedGraph& g, int s, int t, std::size_t limit);

}  // namespace kbest::oracle
