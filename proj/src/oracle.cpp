#include "kbest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kbest::oracle {

namespace {

std::vector<int> edge_indices(const Solution& s) {
  std::vector<int> out;
  for (FeatureId f : s.sets.at(0)) {
    if (f.kind != FeatureKind::Edge) return {-1};
    out.push_back(f.index);
  }
  return out;
}

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n + 1) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    p[a] = b;
    return true;
  }
};

void sort_ranked(std::vector<Ranked>& v) {
  std::sort(v.begin(), v.end(), [](const Ranked& a, const Ranked& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.solution < b.solution;
  });
}

double binom_sum(int n, int lo, int hi) {
  double total = 0;
  for (int k = std::max(lo, 0); k <= std::min(hi, n); ++k)
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  return total;
}

}  // namespace

Predicate simple_path(const WeightedGraph& g, int s, int t) {
  return [&g, s, t](const Solution& sol) {
    if (s == t) return false;
    auto es = edge_indices(sol);
    if (es.empty() || es[0] < 0) return false;
    std::vector<int> in(g.n + 1, 0), out(g.n + 1, 0);
    for (int e : es) {
      const Edge& ed = g.edge(e);
      if (ed.tail == ed.head) return false;
      ++out[ed.tail];
      ++in[ed.head];
    }
    for (int v = 1; v <= g.n; ++v) {
      if (g.directed) {
        int want_out = v == s ? 1 : (v == t ? 0 : -1);
        if (want_out >= 0) {
          if (out[v] != want_out || in[v] != 1 - want_out) return false;
        } else if (in[v] != out[v] || in[v] > 1) {
          return false;
        }
      } else {
        int d = in[v] + out[v];
        if ((v == s || v == t) ? d != 1 : (d != 0 && d != 2)) return false;
      }
    }
    // Walk from s; the walk must reach t after using every edge.
    std::vector<bool> used(es.size(), false);
    int at = s, steps = 0;
    while (at != t) {
      int next = -1;
      for (size_t k = 0; k < es.size() && next < 0; ++k) {
        if (used[k]) continue;
        const Edge& ed = g.edge(es[k]);
        if (ed.tail == at) next = ed.head;
        else if (!g.directed && ed.head == at) next = ed.tail;
        if (next >= 0) used[k] = true;
      }
      if (next < 0) return false;
      at = next;
      ++steps;
    }
    return steps == static_cast<int>(es.size());
  };
}

Predicate spanning_tree(const WeightedGraph& g) {
  return [&g](const Solution& sol) {
    auto es = edge_indices(sol);
    if (!es.empty() && es[0] < 0) return false;
    if (static_cast<int>(es.size()) != g.n - 1) return false;
    Dsu d(g.n);
    for (int e : es)
      if (!d.unite(g.edge(e).tail, g.edge(e).head)) return false;
    return true;
  };
}

Predicate perfect_matching(const WeightedGraph& g) {
  return [&g](const Solution& sol) {
    auto es = edge_indices(sol);
    if (!es.empty() && es[0] < 0) return false;
    std::vector<int> deg(g.n + 1, 0);
    for (int e : es) {
      ++deg[g.edge(e).tail];
      ++deg[g.edge(e).head];
    }
    for (int v = 1; v <= g.n; ++v)
      if (deg[v] != 1) return false;
    return true;
  };
}

Predicate vertex_cover(const WeightedGraph& g) {
  return [&g](const Solution& sol) {
    std::vector<bool> in(g.n + 1, false);
    for (FeatureId f : sol.sets.at(0)) {
      if (f.kind != FeatureKind::Vertex) return false;
      in[f.index] = true;
    }
    for (const Edge& e : g.edges)
      if (!in[e.tail] && !in[e.head]) return false;
    return true;
  };
}

std::vector<Ranked> enumerate_sorted(const WeightedGraph& g, const std::vector<FeatureKind>& var_types,
                                     const Predicate& pred, const std::vector<std::vector<Weight>>& costs,
                                     const std::vector<Requirement>& req, SizeBounds bounds) {
  const int nv = static_cast<int>(var_types.size());
  if (static_cast<int>(costs.size()) != nv) throw std::invalid_argument("one cost vector per variable expected");
  std::vector<int> universe(nv);
  double space = 1;
  for (int v = 0; v < nv; ++v) {
    universe[v] = var_types[v] == FeatureKind::Edge ? g.m() : g.n;
    if (static_cast<int>(costs[v].size()) != universe[v]) throw std::invalid_argument("cost vector has the wrong size");
    space *= binom_sum(universe[v], bounds.min_size, bounds.max_size);
  }
  if (space > kMaxSearchSpace * 1.0000001) throw std::length_error("oracle search space exceeds 2^24 assignments");

  // 0 = free, 1 = forced, 2 = excluded
  std::vector<std::vector<char>> fixed(nv);
  for (int v = 0; v < nv; ++v) fixed[v].assign(universe[v] + 1, 0);
  for (const auto& r : req) {
    if (r.var < 0 || r.var >= nv || r.feature.kind != var_types[r.var] || r.feature.index < 1 ||
        r.feature.index > universe[r.var])
      throw std::invalid_argument("requirement does not fit the variables");
    char want = r.forced ? 1 : 2;
    char& slot = fixed[r.var][r.feature.index];
    if (slot != 0 && slot != want) return {};
    slot = want;
  }

  std::vector<Ranked> out;
  Solution cur;
  cur.sets.resize(nv);
  // Recursive choose/skip over (variable, feature) with running value.
  std::function<void(int, int, Weight)> rec = [&](int v, int f, Weight value) {
    if (v == nv) {
      if (pred(cur)) out.push_back({value, cur});
      return;
    }
    const int size = static_cast<int>(cur.sets[v].size());
    if (f > universe[v]) {
      if (size >= bounds.min_size) rec(v + 1, 1, value);
      return;
    }
    if (size + (universe[v] - f + 1) < bounds.min_size) return;
    FeatureId x{var_types[v], f};
    if (fixed[v][f] != 1) rec(v, f + 1, value);
    if (fixed[v][f] != 2 && size < bounds.max_size) {
      cur.sets[v].push_back(x);
      rec(v, f + 1, add_ext(value, costs[v][f - 1]));
      cur.sets[v].pop_back();
    }
  };
  rec(0, 1, 0);
  sort_ranked(out);
  return out;
}

std::vector<Ranked> solve(Problem p, const WeightedGraph& g0, const ProblemParams& params,
                          const std::vector<Requirement>& req) {
  WeightedGraph g = g0;
  if (p != Problem::SimplePath) g.directed = false;
  SizeBounds b;
  Predicate pred;
  switch (p) {
    case Problem::SimplePath:
      pred = simple_path(g, params.s, params.t);
      b.min_size = 1;
      b.max_size = g.n - 1;
      break;
    case Problem::SpanningTree:
      pred = spanning_tree(g);
      b.min_size = b.max_size = g.n - 1;
      break;
    case Problem::PerfectMatching:
      if (g.n % 2) return {};
      pred = perfect_matching(g);
      b.min_size = b.max_size = g.n / 2;
      break;
    case Problem::VertexCover:
      pred = vertex_cover(g);
      break;
  }
  FeatureKind kind = problem_var_kind(p);
  std::vector<Weight> costs = kind == FeatureKind::Edge ? g.edge_weight : g.vertex_weight;
  return enumerate_sorted(g, {kind}, pred, {costs}, req, b);
}

std::vector<Ranked> enumerate_paths(const WeightedGraph& g, int s, int t, std::size_t limit) {
  if (s < 1 || s > g.n || t < 1 || t > g.n) throw std::invalid_argument("endpoint out of range");
  std::vector<Ranked> out;
  if (s == t) return out;
  std::vector<std::vector<std::pair<int, int>>> adj(g.n + 1);  // (edge, other end)
  for (int e = 1; e <= g.m(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.tail == ed.head) continue;
    adj[ed.tail].push_back({e, ed.head});
    if (!g.directed) adj[ed.head].push_back({e, ed.tail});
  }
  std::vector<bool> on_path(g.n + 1, false);
  std::vector<FeatureId> edges;
  std::function<void(int, Weight)> dfs = [&](int v, Weight value) {
    if (v == t) {
      if (out.size() >= limit) throw std::length_error("more simple paths than the limit");
      Solution sol{{edges}};
      sol.canonicalize();
      out.push_back({value, std::move(sol)});
      return;
    }
    on_path[v] = true;
    for (auto [e, w] : adj[v]) {
      if (on_path[w]) continue;
      edges.push_back(FeatureId::edge(e));
      dfs(w, add_ext(value, g.edge_weight[e - 1]));
      edges.pop_back();
    }
    on_path[v] = false;
  };
  dfs(s, 0);
  sort_ranked(out);
  return out;
}

}  // namespace kbest::oracle
