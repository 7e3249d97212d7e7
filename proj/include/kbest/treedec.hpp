#pragma once

#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kbest/graph.hpp"

namespace kbest {

/// Bags are 0-based internally (bag id = index + 1 in .td files); vertex ids are 1-based.
struct TreeDecomposition {
  int n = 0;  // vertex count of the decomposed graph
  std::vector<std::vector<int>> bags;        // each sorted ascending
  std::vector<std::pair<int, int>> tree_edges;  // 0-based bag indices
  std::optional<int> root;

  int num_bags() const { return static_cast<int>(bags.size()); }
  int width() const;
};

struct Violation {
  enum class Kind { NotATree, BadVertex, MissingVertex, UncoveredEdge, Disconnected };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  int width = -1;
  bool valid() const { return violations.empty(); }
};

ValidationReport validate(const TreeDecomposition& td, const WeightedGraph& g);

/// PACE 2017 .td format.
TreeDecomposition load_td(std::istream& in);
TreeDecomposition load_td_file(const std::string& path);
std::string save_td(const TreeDecomposition& td);

/// Elimination-ordering decomposition: one bag per vertex ({v} plus its
/// later neighbours), components linked into a chain.
TreeDecomposition elimination_decomposition(const WeightedGraph& g, const std::vector<int>& order);

/// Greedy min-fill ordering (ties: lower degree, then smaller id). Vertices of
/// degree above 64 are scored by degree only to bound the update cost.
std::vector<int> min_fill_order(const WeightedGraph& g);

TreeDecomposition heuristic_decomposition(const WeightedGraph& g);

/// Rooted binary decomposition of logarithmic depth.
struct ShallowDecomposition {
  std::vector<std::vector<int>> bags;
  std::vector<std::vector<int>> children;  // at most two per node
  std::vector<int> parent;                 // -1 for the root
  int root = 0;
  int depth = 0;
  int width = -1;

  int num_bags() const { return static_cast<int>(bags.size()); }
  TreeDecomposition as_tree_decomposition() const;
};

inline constexpr int kDefaultDepthConstant = 4;

/// Recursive centroid splitting. Each new bag is the chosen bag plus the
/// interface of its component, so width <= 3 * width(td) + 2.
/// Throws std::invalid_argument if td is not valid for g.
ShallowDecomposition balance(const TreeDecomposition& td, const WeightedGraph& g);

/// ceil(log2(x + 1)); the depth budget unit for balanced decompositions.
int ceil_log2_plus1(long long x);

}  // namespace kbest
