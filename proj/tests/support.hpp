#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kbest/algebra.hpp"
#include "kbest/automaton.hpp"
#include "kbest/graph.hpp"
#include "kbest/oracle.hpp"
#include "kbest/problems.hpp"
#include "kbest/treedec.hpp"

namespace kbest::test {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct GraphShape {
  int min_n = 1, max_n = 10;
  int max_m = 20;
  Weight lo = -20, hi = 100;
  double loop_p = 0.03;      // chance that an edge is a self-loop
  double parallel_p = 0.05;  // chance of repeating an existing edge
  bool directed = false;
  bool connected = false;    // start from a random spanning tree
};

inline WeightedGraph random_graph(Rng& rng, const GraphShape& s) {
  WeightedGraph g;
  g.n = uniform(rng, s.min_n, s.max_n);
  g.directed = s.directed;
  const int m = uniform(rng, s.connected ? std::max(0, g.n - 1) : 0, std::max(s.max_m, s.connected ? g.n - 1 : 0));
  auto weight = [&] { return static_cast<Weight>(uniform(rng, static_cast<int>(s.lo), static_cast<int>(s.hi))); };
  auto orient = [&](int a, int b) { return coin(rng) ? Edge{a, b} : Edge{b, a}; };
  if (s.connected) {
    for (int v = 2; v <= g.n; ++v) g.edges.push_back(orient(uniform(rng, 1, v - 1), v));
  }
  while (g.m() < m) {
    if (g.n >= 1 && coin(rng, s.loop_p)) {
      int v = uniform(rng, 1, g.n);
      g.edges.push_back({v, v});
    } else if (g.m() > 0 && coin(rng, s.parallel_p)) {
      g.edges.push_back(g.edges[uniform(rng, 0, g.m() - 1)]);
    } else if (g.n >= 2) {
      int a = uniform(rng, 1, g.n), b = uniform(rng, 1, g.n - 1);
      if (b >= a) ++b;
      g.edges.push_back(orient(a, b));
    } else {
      break;
    }
  }
  for (int e = 0; e < g.m(); ++e) g.edge_weight.push_back(weight());
  for (int v = 0; v < g.n; ++v) g.vertex_weight.push_back(weight());
  return g;
}

/// Min-fill decomposition or one from a random elimination order.
inline TreeDecomposition random_decomposition(Rng& rng, const WeightedGraph& g) {
  WeightedGraph shadow = undirected_shadow(g);
  if (coin(rng)) return heuristic_decomposition(shadow);
  std::vector<int> order(g.n);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  return elimination_decomposition(shadow, order);
}

struct Case {
  WeightedGraph g;
  TreeDecomposition td;
  ProblemParams params;
};

inline GraphShape shape_for(Problem p, Rng& rng) {
  GraphShape s;
  switch (p) {
    case Problem::SimplePath:
      s.min_n = 2;
      s.directed = coin(rng, 0.3);
      break;
    case Problem::SpanningTree:
      s.connected = coin(rng, 0.8);
      break;
    case Problem::PerfectMatching:
      s.min_n = 2;
      s.connected = true;
      break;
    case Problem::VertexCover:
      s.max_m = 14;
      break;
  }
  return s;
}

/// Random instances for a built-in problem (n <= 10, m <= 20, weights in [-20, 100]).
inline std::vector<Case> corpus(Problem p, int count, std::uint64_t seed) {
  Rng rng(seed * 7919 + static_cast<std::uint64_t>(p));
  std::vector<Case> out;
  while (static_cast<int>(out.size()) < count) {
    GraphShape s = shape_for(p, rng);
    Case c;
    c.g = random_graph(rng, s);
    if (p == Problem::PerfectMatching && c.g.n % 2 && coin(rng, 0.8)) continue;
    c.td = random_decomposition(rng, c.g);
    if (p == Problem::SimplePath) {
      c.params.s = uniform(rng, 1, c.g.n);
      c.params.t = uniform(rng, 1, c.g.n - 1);
      if (c.params.t >= c.params.s) ++c.params.t;
      c.params.directed = c.g.directed;
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline const std::vector<Problem>& all_problems() {
  static const std::vector<Problem> ps{Problem::SimplePath, Problem::SpanningTree, Problem::PerfectMatching,
                                       Problem::VertexCover};
  return ps;
}

/// Every feasible solution, sorted by (value, solution). Simple paths use the
/// depth-first oracle, everything else subset enumeration.
inline std::vector<oracle::Ranked> oracle_solutions(Problem p, const Case& c) {
  if (p == Problem::SimplePath) return oracle::enumerate_paths(c.g, c.params.s, c.params.t, 1u << 22);
  return oracle::solve(p, c.g, c.params);
}

inline oracle::Predicate oracle_predicate(Problem p, const WeightedGraph& g, const ProblemParams& params) {
  switch (p) {
    case Problem::SimplePath: return oracle::simple_path(g, params.s, params.t);
    case Problem::SpanningTree: return oracle::spanning_tree(g);
    case Problem::PerfectMatching: return oracle::perfect_matching(g);
    case Problem::VertexCover: return oracle::vertex_cover(g);
  }
  return {};
}

inline std::vector<Weight> values_of(const std::vector<oracle::Ranked>& r) {
  std::vector<Weight> v;
  for (const auto& x : r) v.push_back(x.value);
  return v;
}

inline std::string describe(const WeightedGraph& g) { return save_graph(g); }

/// Two free edge sets A and B that partition E. Every assignment is feasible,
/// so it exercises multi-variable masks and pivots without automaton logic.
class EdgePartitionAutomaton : public Automaton {
 public:
  std::string name() const override { return "edge-partition"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Edge, FeatureKind::Edge}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override {
    const ParseNode& n = t.node(leaf);
    if (n.kind != OpKind::ConstEdge) return {{State(), {Solution{{{}, {}}}}}};
    FeatureId e = FeatureId::edge(n.feature);
    return {{State(), {Solution{{{e}, {}}}, Solution{{{}, {e}}}}}};
  }
  std::optional<State> combine(const ParseTree&, NodeId, const State&, const State&) const override {
    return State();
  }
  State root_state() const override { return State(); }
};

inline oracle::Predicate edge_partition_predicate(const WeightedGraph& g) {
  return [&g](const Solution& s) {
    std::vector<int> seen(g.m() + 1, 0);
    for (const auto& set : s.sets)
      for (FeatureId f : set) ++seen[f.index];
    return std::all_of(seen.begin() + 1, seen.end(), [](int c) { return c == 1; });
  };
}

/// Induced subgraphs: a vertex set S and the edge set F of all edges with
/// both endpoints in S. Mixes a vertex and an edge variable.
class InducedSubgraphAutomaton : public Automaton {
 public:
  // Per source: bit 0 = vertex claimed in S, bit 1 = this copy introduced it.
  std::string name() const override { return "induced-subgraph"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Vertex, FeatureKind::Edge}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override {
    const ParseNode& n = t.node(leaf);
    const Solution none{{{}, {}}};
    switch (n.kind) {
      case OpKind::Const0: return {{State(), {none}}};
      case OpKind::Const1:
        if (n.introduces) return {{State(1, '\2'), {none}}, {State(1, '\3'), {Solution{{{FeatureId::vertex(n.feature)}, {}}}}}};
        return {{State(1, '\0'), {none}}, {State(1, '\1'), {none}}};
      case OpKind::ConstEdge: {
        FeatureId e = FeatureId::edge(n.feature);
        return {{std::string("\0\0", 2), {none}},
                {std::string("\0\1", 2), {none}},
                {std::string("\1\0", 2), {none}},
                {std::string("\1\1", 2), {Solution{{{}, {e}}}}}};
      }
      default: return {};
    }
  }
  std::optional<State> combine(const ParseTree& t, NodeId u, const State& left, const State& right) const override {
    const ParseNode& n = t.node(u);
    switch (n.kind) {
      case OpKind::Disjoint: return left + right;
      case OpKind::Fuse: {
        char x = left[n.fuse_i], y = left[n.fuse_j], z = right.at(0);
        if ((x & 1) != (y & 1) || (x & 1) != (z & 1)) return std::nullopt;
        int intros = ((x >> 1) & 1) + ((y >> 1) & 1) + ((z >> 1) & 1);
        if (intros > 1) return std::nullopt;
        State q = left;
        q[n.fuse_i] = static_cast<char>((x & 1) | (intros ? 2 : 0));
        q.erase(q.begin() + n.fuse_j);
        return q;
      }
      case OpKind::Permute: {
        auto alpha = t.alpha(u);
        std::vector<char> kept(left.size(), 0);
        for (int a : alpha) kept[a] = 1;
        for (size_t k = 0; k < left.size(); ++k)
          if (!kept[k] && !(left[k] & 2)) return std::nullopt;
        State q;
        for (int a : alpha) q.push_back(left[a]);
        return q;
      }
      default: return std::nullopt;
    }
  }
  State root_state() const override { return State(); }
};

inline oracle::Predicate induced_subgraph_predicate(const WeightedGraph& g) {
  return [&g](const Solution& s) {
    std::vector<bool> in(g.n + 1, false);
    for (FeatureId f : s.sets[0]) in[f.index] = true;
    std::set<int> chosen;
    for (FeatureId f : s.sets[1]) chosen.insert(f.index);
    for (int e = 1; e <= g.m(); ++e)
      if ((in[g.edge(e).tail] && in[g.edge(e).head]) != (chosen.count(e) > 0)) return false;
    return true;
  };
}

/// Cost model with independent random costs per (variable, feature).
inline CostModel random_costs(Rng& rng, const WeightedGraph& g, const std::vector<FeatureKind>& types) {
  CostModel c(types, g);
  for (int var = 0; var < static_cast<int>(types.size()); ++var) {
    int count = types[var] == FeatureKind::Edge ? g.m() : g.n;
    for (int i = 1; i <= count; ++i) {
      FeatureId f = types[var] == FeatureKind::Edge ? FeatureId::edge(i) : FeatureId::vertex(i);
      c.set_cost(var, f, uniform(rng, -20, 100));
    }
  }
  return c;
}

inline std::vector<std::vector<Weight>> cost_table(const CostModel& c, const WeightedGraph& g) {
  std::vector<std::vector<Weight>> out;
  for (int var = 0; var < c.n_free(); ++var) {
    bool edge = c.var_type(var) == FeatureKind::Edge;
    std::vector<Weight> row;
    for (int i = 1; i <= (edge ? g.m() : g.n); ++i)
      row.push_back(c.cost(var, edge ? FeatureId::edge(i) : FeatureId::vertex(i)));
    out.push_back(std::move(row));
  }
  return out;
}

/// Simple families of width <= 2 used for scale checks.
inline WeightedGraph path_graph(int n, Weight w = 1) {
  WeightedGraph g;
  g.n = n;
  for (int v = 1; v < n; ++v) {
    g.edges.push_back({v, v + 1});
    g.edge_weight.push_back(w);
  }
  g.vertex_weight.assign(n, 0);
  return g;
}

inline WeightedGraph cycle_graph(int n, std::uint64_t seed = 1) {
  Rng rng(seed);
  WeightedGraph g = path_graph(n);
  g.edges.push_back({n, 1});
  g.edge_weight.push_back(1);
  for (auto& w : g.edge_weight) w = uniform(rng, 1, 100);
  return g;
}

/// 2 x (n/2) grid strip ("ladder"); vertex i on the top row is 2i-1, bottom 2i.
inline WeightedGraph ladder_graph(int n, std::uint64_t seed = 1) {
  Rng rng(seed);
  WeightedGraph g;
  const int cols = n / 2;
  g.n = 2 * cols;
  for (int c = 1; c <= cols; ++c) {
    g.edges.push_back({2 * c - 1, 2 * c});
    if (c < cols) {
      g.edges.push_back({2 * c - 1, 2 * c + 1});
      g.edges.push_back({2 * c, 2 * c + 2});
    }
  }
  for (size_t e = 0; e < g.edges.size(); ++e) g.edge_weight.push_back(uniform(rng, 1, 100));
  g.vertex_weight.assign(g.n, 0);
  return g;
}

/// Every multigraph on n vertices with at most max_m edges, as multisets of
/// unordered vertex pairs (loops included when asked). Directed copies orient
/// each edge from the smaller to the larger id, reversed for odd edge indices.
inline std::vector<WeightedGraph> all_small_graphs(int n, int max_m, bool loops, bool directed) {
  std::vector<Edge> pairs;
  for (int a = 1; a <= n; ++a)
    for (int b = loops ? a : a + 1; b <= n; ++b) pairs.push_back({a, b});
  std::vector<WeightedGraph> out;
  std::vector<int> pick;
  auto emit = [&] {
    WeightedGraph g;
    g.n = n;
    g.directed = directed;
    for (size_t k = 0; k < pick.size(); ++k) {
      Edge e = pairs[pick[k]];
      if (directed && k % 2) std::swap(e.tail, e.head);
      g.edges.push_back(e);
      g.edge_weight.push_back(static_cast<Weight>((7 * k + 3) % 11) - 4);
    }
    for (int v = 1; v <= n; ++v) g.vertex_weight.push_back((5 * v) % 7 - 2);
    out.push_back(std::move(g));
  };
  std::function<void(int)> rec = [&](int from) {
    emit();
    if (static_cast<int>(pick.size()) == max_m) return;
    for (int i = from; i < static_cast<int>(pairs.size()); ++i) {
      pick.push_back(i);
      rec(i);
      pick.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Explicit solution families per (node, state), built by the same fitting
/// pairs the engine uses. Reports the first (node, state) holding a repeated
/// solution and returns the family of the accepting root state.
struct Accumulation {
  bool duplicate = false;
  std::string where;
  std::vector<Solution> root;
};

inline Accumulation accumulate(const ParseTree& t, const StateTable& st) {
  Accumulation res;
  const int nf = st.n_free();
  std::vector<std::vector<std::vector<Solution>>> fam(t.size());
  for (NodeId u = 0; u < t.size(); ++u) {
    const ParseNode& n = t.node(u);
    const int S = st.num_states(u);
    fam[u].resize(S);
    for (int q = 0; q < S; ++q) {
      auto& out = fam[u][q];
      if (n.is_leaf()) {
        auto x = StateTable::leaf_feature(t, u);
        auto masks = st.leaf_masks(u);
        for (auto i : st.leaf_state_solutions(u, q)) {
          if (!x && masks[i]) {
            res.duplicate = true;
            res.where = "featureless leaf with a non-empty mask at node " + std::to_string(u);
          }
          out.push_back(x ? StateTable::mask_solution(masks[i], *x, nf) : Solution{std::vector<std::vector<FeatureId>>(nf)});
        }
      } else {
        for (const FittingPair& p : st.pairs(u, q))
          for (const Solution& a : fam[n.child[0]][p.left])
            for (const Solution& b : fam[n.child[1]][p.right]) {
              Solution c = a;
              for (int v = 0; v < nf; ++v) c.sets[v].insert(c.sets[v].end(), b.sets[v].begin(), b.sets[v].end());
              c.canonicalize();
              out.push_back(std::move(c));
            }
      }
      std::sort(out.begin(), out.end());
      if (std::adjacent_find(out.begin(), out.end()) != out.end() && !res.duplicate) {
        res.duplicate = true;
        res.where = "node " + std::to_string(u) + " state " + std::to_string(q);
      }
    }
    if (!n.is_leaf()) {
      fam[n.child[0]].clear();
      fam[n.child[1]].clear();
    }
  }
  if (st.root_state() >= 0) res.root = fam[t.root()][st.root_state()];
  return res;
}

inline std::vector<Solution> solutions_of(const std::vector<oracle::Ranked>& r) {
  std::vector<Solution> out;
  for (const auto& x : r) out.push_back(x.solution);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kbest::test
