#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbest/graph.hpp"
#include "kbest/treedec.hpp"

namespace kbest {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class OpKind : std::uint8_t {
  Const0,     // empty hypergraph, order 0
  Const1,     // one source vertex, no edges
  ConstEdge,  // one order-2 edge whose endpoints are its two sources
  Disjoint,   // disjoint union, sources concatenated
  Fuse,       // identifies source j with source i (and the Const1 operand); position j is dropped
  Permute,    // new source k is old source alpha[k]; second operand is Const0
};

enum class EdgeLabel : std::uint8_t { Undirected, Forward, Backward };

const char* to_string(OpKind k);
const char* to_string(EdgeLabel l);

/// Operator view of a node. Source positions are 1-based here, as in the
/// algebra's notation; ParseNode stores them 0-based.
struct Operator {
  OpKind kind = OpKind::Const0;
  int r_left = 0, r_right = 0;  // Disjoint
  int i = 0, j = 0, r = 0;      // Fuse: 1 <= i < j <= r
  std::vector<int> alpha;       // Permute: alpha[k-1] in [1, r]
  EdgeLabel label = EdgeLabel::Undirected;
  int edge = 0;                 // ConstEdge: graph edge index
};

struct ParseNode {
  OpKind kind = OpKind::Const0;
  EdgeLabel label = EdgeLabel::Undirected;
  bool introduces = false;  // leaf that introduces `feature`
  std::int32_t order = 0;
  NodeId child[2] = {kNoNode, kNoNode};
  std::int32_t fuse_i = 0, fuse_j = 0;  // 0-based positions in child[0]
  std::int32_t feature = 0;  // ConstEdge: edge index; Const1: vertex id
  std::uint32_t src_offset = 0;
  std::uint32_t alpha_offset = 0;
  std::uint32_t alpha_size = 0;

  bool is_leaf() const { return child[0] == kNoNode; }
};

/// Full binary parse tree over the derived algebra. Node ids are assigned
/// bottom-up: every child id is smaller than its parent's.
class ParseTree {
 public:
  NodeId root() const { return root_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const ParseNode& node(NodeId u) const { return nodes_[u]; }
  std::span<const int> sources(NodeId u) const {
    return {src_pool_.data() + nodes_[u].src_offset, static_cast<size_t>(nodes_[u].order)};
  }
  std::span<const int> alpha(NodeId u) const {
    return {alpha_pool_.data() + nodes_[u].alpha_offset, nodes_[u].alpha_size};
  }
  Operator op(NodeId u) const;

  /// Height of the root (a single leaf has depth 0).
  int depth() const { return depth_; }
  int max_order() const { return max_order_; }
  int num_vertices() const { return static_cast<int>(vertex_intro_.size()) - 1; }
  int num_edges() const { return static_cast<int>(edge_intro_.size()) - 1; }

  /// Leaf introducing a feature; throws std::out_of_range for unknown features.
  NodeId introducing_leaf(FeatureId x) const;

  /// Indented text dump, one node per line.
  void dump(std::ostream& out) const;

 private:
  friend class ParseTreeBuilder;
  std::vector<ParseNode> nodes_;
  std::vector<int> src_pool_;
  std::vector<int> alpha_pool_;
  std::vector<NodeId> vertex_intro_;  // index by vertex id
  std::vector<NodeId> edge_intro_;    // index by edge id
  NodeId root_ = kNoNode;
  int depth_ = 0;
  int max_order_ = 0;
};

/// Each bag becomes a fixed-size fragment: its edges (each assigned to the
/// topmost covering bag) as ConstEdge leaves fused into the bag's vertices,
/// one introducing Fuse gadget per vertex whose topmost bag this is, then the
/// children's fragments projected onto the bag and fused in.
ParseTree build_parse_tree(const ShallowDecomposition& sd, const WeightedGraph& g);

/// Hypergraph obtained by applying the operator semantics bottom-up.
/// Reference semantics for tests; vertices are named by the features of the
/// introducing leaves merged into them.
struct Hypergraph {
  struct HyperEdge {
    EdgeLabel label;
    int edge_id;
    std::vector<int> vert;
  };
  int num_vertices = 0;
  std::vector<std::vector<int>> vertex_names;  // introduced vertex ids merged into each vertex
  std::vector<HyperEdge> edges;
  std::vector<int> src;
};

Hypergraph evaluate_hypergraph(const ParseTree& t);

/// True iff h is the graph g with vertex i named {i} and edge ids preserved.
bool matches_graph(const Hypergraph& h, const WeightedGraph& g, std::string* why = nullptr);

}  // namespace kbest
