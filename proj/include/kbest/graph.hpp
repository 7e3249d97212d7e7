#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbest {

/// Thrown for malformed input files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Exact integer weights extended by +infinity (the largest int64).
using Weight = std::int64_t;
inline constexpr Weight kInf = std::numeric_limits<Weight>::max();

inline bool is_inf(Weight w) { return w == kInf; }

/// Extended addition: infinity absorbs; finite overflow throws.
inline Weight add_ext(Weight a, Weight b) {
  if (a == kInf || b == kInf) return kInf;
  Weight r;
  if (__builtin_add_overflow(a, b, &r) || r == kInf) throw OverflowError("weight sum overflows int64");
  return r;
}

std::string weight_to_string(Weight w);

enum class FeatureKind : std::uint8_t { Vertex = 0, Edge = 1 };

/// A vertex or an edge of the input graph, 1-based per file order.
/// Ordered vertices first, then by index.
struct FeatureId {
  FeatureKind kind = FeatureKind::Vertex;
  std::int32_t index = 0;

  static FeatureId vertex(int v) { return {FeatureKind::Vertex, v}; }
  static FeatureId edge(int e) { return {FeatureKind::Edge, e}; }

  auto operator<=>(const FeatureId&) const = default;
  std::string str() const;  // "v3" / "e7"
};

struct Edge {
  int tail = 0;
  int head = 0;
};

/// Input graph. Vertices 1..n, edges 1..m (stored 0-based in the vectors).
struct WeightedGraph {
  int n = 0;
  bool directed = false;
  std::vector<Edge> edges;
  std::vector<Weight> edge_weight;    // size m
  std::vector<Weight> vertex_weight;  // size n, default 0

  int m() const { return static_cast<int>(edges.size()); }
  const Edge& edge(int e) const { return edges.at(e - 1); }
  Weight weight(FeatureId f) const;
  bool has_feature(FeatureId f) const;
};

/// Parses the line-oriented .gr format (see README).
WeightedGraph load_graph(std::istream& in);
WeightedGraph load_graph_file(const std::string& path);
std::string save_graph(const WeightedGraph& g);

/// Same graph with orientations forgotten; edge indices preserved.
WeightedGraph undirected_shadow(const WeightedGraph& g);

/// One feature set per free variable, each sorted in FeatureId order.
struct Solution {
  std::vector<std::vector<FeatureId>> sets;

  auto operator<=>(const Solution&) const = default;
  bool operator==(const Solution&) const = default;

  bool contains(int var, FeatureId f) const;
  void canonicalize();
  /// "e1,e2|v3": variables separated by '|'.
  std::string encode() const;
};

class CostModel {
 public:
  CostModel() = default;
  CostModel(std::vector<FeatureKind> var_types, const WeightedGraph& g);

  /// Single free variable of the given kind with the graph's own weights.
  static CostModel from_graph(const WeightedGraph& g, FeatureKind kind);

  int n_free() const { return static_cast<int>(var_types_.size()); }
  FeatureKind var_type(int var) const { return var_types_.at(var); }
  const std::vector<FeatureKind>& var_types() const { return var_types_; }

  Weight cost(int var, FeatureId f) const;
  void set_cost(int var, FeatureId f, Weight w);

 private:
  std::vector<FeatureKind> var_types_;
  std::vector<std::vector<Weight>> costs_;  // per var, indexed by feature index - 1
};

/// Sum of the costs of every feature in every set; throws on kind mismatch or overflow.
Weight solution_value(const Solution& s, const CostModel& c);

}  // namespace kbest
