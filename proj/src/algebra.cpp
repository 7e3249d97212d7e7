#include "kbest/algebra.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace kbest {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Const0: return "const0";
    case OpKind::Const1: return "const1";
    case OpKind::ConstEdge: return "edge";
    case OpKind::Disjoint: return "disjoint";
    case OpKind::Fuse: return "fuse";
    case OpKind::Permute: return "permute";
  }
  return "?";
}

const char* to_string(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::Undirected: return "undir";
    case EdgeLabel::Forward: return "fwd";
    case EdgeLabel::Backward: return "bwd";
  }
  return "?";
}

Operator ParseTree::op(NodeId u) const {
  const ParseNode& n = nodes_[u];
  Operator o;
  o.kind = n.kind;
  switch (n.kind) {
    case OpKind::Disjoint:
      o.r_left = nodes_[n.child[0]].order;
      o.r_right = nodes_[n.child[1]].order;
      break;
    case OpKind::Fuse:
      o.i = n.fuse_i + 1;
      o.j = n.fuse_j + 1;
      o.r = nodes_[n.child[0]].order;
      break;
    case OpKind::Permute:
      for (int a : alpha(u)) o.alpha.push_back(a + 1);
      o.r = nodes_[n.child[0]].order;
      break;
    case OpKind::ConstEdge:
      o.label = n.label;
      o.edge = n.feature;
      break;
    default:
      break;
  }
  return o;
}

NodeId ParseTree::introducing_leaf(FeatureId x) const {
  const auto& table = x.kind == FeatureKind::Vertex ? vertex_intro_ : edge_intro_;
  if (x.index < 1 || x.index >= static_cast<int>(table.size()) || table[x.index] == kNoNode)
    throw std::out_of_range("feature " + x.str() + " is not part of the parse tree");
  return table[x.index];
}

void ParseTree::dump(std::ostream& out) const {
  if (root_ == kNoNode) return;
  std::vector<std::pair<NodeId, int>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [u, indent] = stack.back();
    stack.pop_back();
    const ParseNode& n = nodes_[u];
    out << std::string(2 * indent, ' ') << to_string(n.kind);
    if (n.kind == OpKind::Fuse) out << '(' << n.fuse_i + 1 << ',' << n.fuse_j + 1 << ')';
    if (n.kind == OpKind::Permute) {
      out << '(';
      auto a = alpha(u);
      for (size_t k = 0; k < a.size(); ++k) out << (k ? "," : "") << a[k] + 1;
      out << ')';
    }
    if (n.kind == OpKind::ConstEdge) out << " e" << n.feature << ' ' << to_string(n.label);
    if (n.introduces) out << " introduces " << (n.kind == OpKind::ConstEdge ? "e" : "v") << n.feature;
    out << " order=" << n.order << " src=[";
    auto s = sources(u);
    for (size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << s[k];
    out << "]\n";
    if (!n.is_leaf()) {
      stack.push_back({n.child[1], indent + 1});
      stack.push_back({n.child[0], indent + 1});
    }
  }
}

class ParseTreeBuilder {
 public:
  ParseTreeBuilder(const ShallowDecomposition& sd, const WeightedGraph& g) : sd_(sd), g_(g) {
    t_.vertex_intro_.assign(g.n + 1, kNoNode);
    t_.edge_intro_.assign(g.m() + 1, kNoNode);
  }

  ParseTree build() {
    const int nb = sd_.num_bags();
    std::vector<int> depth(nb, 0);
    std::vector<int> order{sd_.root};
    for (size_t i = 0; i < order.size(); ++i)
      for (int c : sd_.children[order[i]]) {
        depth[c] = depth[order[i]] + 1;
        order.push_back(c);
      }
    top_.assign(g_.n + 1, -1);
    for (int b : order)
      for (int v : sd_.bags[b])
        if (top_[v] == -1) top_[v] = b;
    edges_at_.assign(nb, {});
    for (int e = 1; e <= g_.m(); ++e) {
      const Edge& ed = g_.edge(e);
      int a = top_[ed.tail], b = top_[ed.head];
      if (a < 0 || b < 0) throw std::invalid_argument("decomposition misses an edge endpoint");
      int bag = depth[a] >= depth[b] ? a : b;
      const auto& bv = sd_.bags[bag];
      if (!std::binary_search(bv.begin(), bv.end(), ed.tail) || !std::binary_search(bv.begin(), bv.end(), ed.head))
        throw std::invalid_argument("decomposition does not cover edge " + std::to_string(e));
      edges_at_[bag].push_back(e);
    }
    for (int v = 1; v <= g_.n; ++v)
      if (top_[v] < 0) throw std::invalid_argument("decomposition misses vertex " + std::to_string(v));

    NodeId h = build_bag(sd_.root);
    if (h == kNoNode) h = leaf(OpKind::Const0, 0);
    if (t_.nodes_[h].order > 0) h = permute(h, {});
    t_.root_ = h;

    std::vector<int> height(t_.nodes_.size(), 0);
    for (size_t u = 0; u < t_.nodes_.size(); ++u) {
      const ParseNode& n = t_.nodes_[u];
      if (!n.is_leaf()) height[u] = 1 + std::max(height[n.child[0]], height[n.child[1]]);
      t_.max_order_ = std::max(t_.max_order_, static_cast<int>(n.order));
    }
    t_.depth_ = height[h];
    return std::move(t_);
  }

 private:
  NodeId add(ParseNode n, const std::vector<int>& src) {
    n.order = static_cast<int>(src.size());
    n.src_offset = static_cast<std::uint32_t>(t_.src_pool_.size());
    t_.src_pool_.insert(t_.src_pool_.end(), src.begin(), src.end());
    t_.nodes_.push_back(n);
    return static_cast<NodeId>(t_.nodes_.size()) - 1;
  }

  std::vector<int> src(NodeId u) const {
    auto s = t_.sources(u);
    return {s.begin(), s.end()};
  }

  NodeId leaf(OpKind kind, int vertex) {
    ParseNode n;
    n.kind = kind;
    if (kind == OpKind::Const1) {
      n.feature = vertex;
      return add(n, {vertex});
    }
    return add(n, {});
  }

  NodeId edge_leaf(int e) {
    ParseNode n;
    n.kind = OpKind::ConstEdge;
    n.label = g_.directed ? EdgeLabel::Forward : EdgeLabel::Undirected;
    n.feature = e;
    n.introduces = true;
    const Edge& ed = g_.edge(e);
    NodeId id = add(n, {ed.tail, ed.head});
    t_.edge_intro_[e] = id;
    return id;
  }

  NodeId disjoint(NodeId a, NodeId b) {
    ParseNode n;
    n.kind = OpKind::Disjoint;
    n.child[0] = a;
    n.child[1] = b;
    auto s = src(a);
    auto sb = src(b);
    s.insert(s.end(), sb.begin(), sb.end());
    return add(n, s);
  }

  NodeId fuse(NodeId a, int i, int j, bool introducer) {
    auto s = src(a);
    NodeId one = leaf(OpKind::Const1, s[i]);
    if (introducer) {
      t_.nodes_[one].introduces = true;
      t_.vertex_intro_[s[i]] = one;
    }
    ParseNode n;
    n.kind = OpKind::Fuse;
    n.child[0] = a;
    n.child[1] = one;
    n.fuse_i = i;
    n.fuse_j = j;
    s.erase(s.begin() + j);
    return add(n, s);
  }

  NodeId permute(NodeId a, const std::vector<int>& alpha) {
    NodeId zero = leaf(OpKind::Const0, 0);
    ParseNode n;
    n.kind = OpKind::Permute;
    n.child[0] = a;
    n.child[1] = zero;
    n.alpha_offset = static_cast<std::uint32_t>(t_.alpha_pool_.size());
    n.alpha_size = static_cast<std::uint32_t>(alpha.size());
    t_.alpha_pool_.insert(t_.alpha_pool_.end(), alpha.begin(), alpha.end());
    auto s = src(a);
    std::vector<int> out;
    for (int k : alpha) out.push_back(s[k]);
    return add(n, out);
  }

  // Fuses repeated source vertices until every vertex occurs once.
  NodeId dedupe(NodeId h) {
    for (;;) {
      auto s = src(h);
      int fi = -1, fj = -1;
      for (int j = 0; j < static_cast<int>(s.size()) && fi < 0; ++j)
        for (int i = 0; i < j; ++i)
          if (s[i] == s[j]) {
            fi = i, fj = j;
            break;
          }
      if (fi < 0) return h;
      h = fuse(h, fi, fj, false);
    }
  }

  NodeId attach(NodeId h, NodeId x) {
    if (h == kNoNode) return dedupe(x);
    return dedupe(disjoint(h, x));
  }

  NodeId introduce(NodeId h, int v) {
    auto has = [&](NodeId u) {
      if (u == kNoNode) return false;
      auto s = t_.sources(u);
      return std::find(s.begin(), s.end(), v) != s.end();
    };
    if (!has(h)) h = attach(h, leaf(OpKind::Const1, v));
    NodeId y = disjoint(h, leaf(OpKind::Const1, v));
    auto s = src(y);
    int i = static_cast<int>(std::find(s.begin(), s.end(), v) - s.begin());
    return fuse(y, i, static_cast<int>(s.size()) - 1, true);
  }

  NodeId build_bag(int b) {
    NodeId h = kNoNode;
    const auto& bag = sd_.bags[b];
    for (int e : edges_at_[b]) h = attach(h, edge_leaf(e));
    for (int v : bag)
      if (top_[v] == b) h = introduce(h, v);
    for (int c : sd_.children[b]) {
      NodeId hc = build_bag(c);
      if (hc == kNoNode) continue;
      auto s = src(hc);
      std::vector<int> keep;
      for (int k = 0; k < static_cast<int>(s.size()); ++k)
        if (std::binary_search(bag.begin(), bag.end(), s[k])) keep.push_back(k);
      if (keep.size() != s.size()) hc = permute(hc, keep);
      h = attach(h, hc);
    }
    return h;
  }

  const ShallowDecomposition& sd_;
  const WeightedGraph& g_;
  ParseTree t_;
  std::vector<int> top_;
  std::vector<std::vector<int>> edges_at_;
};

ParseTree build_parse_tree(const ShallowDecomposition& sd, const WeightedGraph& g) {
  return ParseTreeBuilder(sd, g).build();
}

namespace {

struct DisjointSets {
  std::vector<int> p;
  int make() {
    p.push_back(static_cast<int>(p.size()));
    return p.back();
  }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int keep, int other) {
    keep = find(keep), other = find(other);
    if (keep != other) p[other] = keep;
  }
};

}  // namespace

Hypergraph evaluate_hypergraph(const ParseTree& t) {
  DisjointSets ds;
  std::vector<std::vector<int>> src(t.size());
  std::vector<std::pair<int, int>> named;  // (vertex, introduced id)
  Hypergraph h;
  for (NodeId u = 0; u < t.size(); ++u) {
    const ParseNode& n = t.node(u);
    switch (n.kind) {
      case OpKind::Const0:
        break;
      case OpKind::Const1: {
        int v = ds.make();
        if (n.introduces) named.emplace_back(v, n.feature);
        src[u] = {v};
        break;
      }
      case OpKind::ConstEdge: {
        int a = ds.make(), b = ds.make();
        h.edges.push_back({n.label, n.feature, {a, b}});
        src[u] = {a, b};
        break;
      }
      case OpKind::Disjoint: {
        src[u] = src[n.child[0]];
        const auto& r = src[n.child[1]];
        src[u].insert(src[u].end(), r.begin(), r.end());
        break;
      }
      case OpKind::Fuse: {
        auto s = src[n.child[0]];
        const auto& one = src[n.child[1]];
        if (t.node(n.child[1]).kind != OpKind::Const1 || one.size() != 1)
          throw std::logic_error("fuse node without a one-vertex operand");
        if (!(0 <= n.fuse_i && n.fuse_i < n.fuse_j && n.fuse_j < static_cast<int>(s.size())))
          throw std::logic_error("fuse positions out of range");
        ds.unite(s[n.fuse_i], s[n.fuse_j]);
        ds.unite(s[n.fuse_i], one[0]);
        s.erase(s.begin() + n.fuse_j);
        src[u] = std::move(s);
        break;
      }
      case OpKind::Permute: {
        if (t.node(n.child[1]).kind != OpKind::Const0) throw std::logic_error("permute node without an empty operand");
        const auto& s = src[n.child[0]];
        std::vector<int> out;
        for (int a : t.alpha(u)) {
          if (a < 0 || a >= static_cast<int>(s.size())) throw std::logic_error("permute index out of range");
          out.push_back(s[a]);
        }
        src[u] = std::move(out);
        break;
      }
    }
    if (static_cast<int>(src[u].size()) != n.order) throw std::logic_error("node order disagrees with its sources");
    if (!n.is_leaf()) {
      src[n.child[0]].clear();
      src[n.child[0]].shrink_to_fit();
      src[n.child[1]].clear();
      src[n.child[1]].shrink_to_fit();
    }
  }
  // Compact the representatives into vertex numbers.
  std::vector<int> index(ds.p.size(), -1);
  for (int v = 0; v < static_cast<int>(ds.p.size()); ++v) {
    int r = ds.find(v);
    if (index[r] < 0) index[r] = h.num_vertices++;
  }
  h.vertex_names.assign(h.num_vertices, {});
  for (auto [v, id] : named) h.vertex_names[index[ds.find(v)]].push_back(id);
  for (auto& e : h.edges) {
    if (e.vert.size() != 2) throw std::logic_error("edge order does not match its label");
    for (int& v : e.vert) v = index[ds.find(v)];
  }
  if (t.root() != kNoNode)
    for (int v : src[t.root()]) h.src.push_back(index[ds.find(v)]);
  return h;
}

bool matches_graph(const Hypergraph& h, const WeightedGraph& g, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (h.num_vertices != g.n) return fail("vertex count " + std::to_string(h.num_vertices) + " != " + std::to_string(g.n));
  std::vector<int> name(h.num_vertices, 0);
  std::vector<bool> used(g.n + 1, false);
  for (int v = 0; v < h.num_vertices; ++v) {
    if (h.vertex_names[v].size() != 1) return fail("vertex introduced " + std::to_string(h.vertex_names[v].size()) + " times");
    int id = h.vertex_names[v][0];
    if (id < 1 || id > g.n || used[id]) return fail("vertex name " + std::to_string(id) + " invalid or repeated");
    used[id] = true;
    name[v] = id;
  }
  if (static_cast<int>(h.edges.size()) != g.m()) return fail("edge count mismatch");
  std::vector<bool> seen(g.m() + 1, false);
  for (const auto& e : h.edges) {
    if (e.edge_id < 1 || e.edge_id > g.m() || seen[e.edge_id]) return fail("edge id invalid or repeated");
    seen[e.edge_id] = true;
    const Edge& ge = g.edge(e.edge_id);
    int a = name[e.vert[0]], b = name[e.vert[1]];
    EdgeLabel want = g.directed ? EdgeLabel::Forward : EdgeLabel::Undirected;
    if (e.label != want) return fail("edge e" + std::to_string(e.edge_id) + " has the wrong label");
    bool ok = (a == ge.tail && b == ge.head) || (!g.directed && a == ge.head && b == ge.tail);
    if (!ok) return fail("edge e" + std::to_string(e.edge_id) + " has wrong endpoints");
  }
  return true;
}

}  // namespace kbest
