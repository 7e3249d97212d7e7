#include "kbest/treedec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace kbest {

int TreeDecomposition::width() const {
  int w = -1;
  for (const auto& b : bags) w = std::max(w, static_cast<int>(b.size()) - 1);
  return w;
}

int ceil_log2_plus1(long long x) {
  int k = 0;
  while ((1LL << k) < x + 1) ++k;
  return k;
}

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    p[b] = a;
    return true;
  }
};

bool sorted_contains(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

}  // namespace

ValidationReport validate(const TreeDecomposition& td, const WeightedGraph& g) {
  ValidationReport rep;
  rep.width = td.width();
  const int nb = td.num_bags();
  auto add = [&](Violation::Kind k, std::string msg) { rep.violations.push_back({k, std::move(msg)}); };

  bool is_tree = nb > 0 && static_cast<int>(td.tree_edges.size()) == nb - 1;
  UnionFind uf(std::max(nb, 1));
  for (auto [a, b] : td.tree_edges) {
    if (a < 0 || b < 0 || a >= nb || b >= nb) {
      add(Violation::Kind::NotATree, "tree edge references unknown bag");
      is_tree = false;
      continue;
    }
    if (!uf.unite(a, b)) is_tree = false;
  }
  if (!is_tree) add(Violation::Kind::NotATree, "bags do not form a tree");

  std::vector<std::vector<int>> bags_of(g.n + 1);
  for (int b = 0; b < nb; ++b) {
    for (int v : td.bags[b]) {
      if (v < 1 || v > g.n) {
        add(Violation::Kind::BadVertex, "bag " + std::to_string(b + 1) + " contains unknown vertex " + std::to_string(v));
        continue;
      }
      bags_of[v].push_back(b);
    }
  }
  for (int v = 1; v <= g.n; ++v)
    if (bags_of[v].empty()) add(Violation::Kind::MissingVertex, "vertex " + std::to_string(v) + " is in no bag");

  for (int e = 0; e < g.m(); ++e) {
    auto [t, h] = g.edges[e];
    int a = t, b = h;
    if (bags_of[a].size() > bags_of[b].size()) std::swap(a, b);
    bool covered = false;
    for (int bag : bags_of[a])
      if (sorted_contains(td.bags[bag], b)) {
        covered = true;
        break;
      }
    if (!covered)
      add(Violation::Kind::UncoveredEdge, "edge " + std::to_string(e + 1) + " (" + std::to_string(t) + "," +
                                              std::to_string(h) + ") is not covered by any bag");
  }

  if (is_tree) {
    // In a tree the bags holding v induce a forest; it is connected iff it has |bags|-1 edges.
    std::vector<int> inner(g.n + 1, 0);
    for (auto [a, b] : td.tree_edges) {
      const auto& x = td.bags[a];
      const auto& y = td.bags[b];
      size_t i = 0, j = 0;
      while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) ++i;
        else if (y[j] < x[i]) ++j;
        else {
          if (x[i] >= 1 && x[i] <= g.n) ++inner[x[i]];
          ++i, ++j;
        }
      }
    }
    for (int v = 1; v <= g.n; ++v)
      if (!bags_of[v].empty() && inner[v] != static_cast<int>(bags_of[v].size()) - 1)
        add(Violation::Kind::Disconnected, "bags containing vertex " + std::to_string(v) + " are not connected");
  }
  return rep;
}

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long to_int(std::string_view tok, int line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "bad integer '" + std::string(tok) + "'");
  return v;
}

}  // namespace

TreeDecomposition load_td(std::istream& in) {
  TreeDecomposition td;
  bool header = false;
  long long declared_max = 0;
  std::vector<bool> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto tok = tokens(raw);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "s") {
      if (header) throw ParseError(line_no, "duplicate header");
      if (tok.size() != 5 || tok[1] != "td") throw ParseError(line_no, "expected 's td <bags> <max bag size> <n>'");
      long long nb = to_int(tok[2], line_no);
      declared_max = to_int(tok[3], line_no);
      long long n = to_int(tok[4], line_no);
      if (nb < 0 || nb > 100'000'000 || n < 0 || n > 100'000'000 || declared_max < 0)
        throw ParseError(line_no, "header value out of range");
      td.n = static_cast<int>(n);
      td.bags.assign(nb, {});
      seen.assign(nb, false);
      header = true;
      continue;
    }
    if (!header) throw ParseError(line_no, "content before header");
    if (tok[0] == "b") {
      if (tok.size() < 2) throw ParseError(line_no, "bag line without id");
      long long id = to_int(tok[1], line_no);
      if (id < 1 || id > td.num_bags()) throw ParseError(line_no, "bag id out of range");
      if (seen[id - 1]) throw ParseError(line_no, "duplicate bag " + std::to_string(id));
      seen[id - 1] = true;
      auto& bag = td.bags[id - 1];
      for (size_t i = 2; i < tok.size(); ++i) {
        long long v = to_int(tok[i], line_no);
        if (v < 1 || v > td.n) throw ParseError(line_no, "vertex out of range");
        bag.push_back(static_cast<int>(v));
      }
      std::sort(bag.begin(), bag.end());
      bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
      if (static_cast<long long>(bag.size()) > declared_max) throw ParseError(line_no, "bag larger than declared maximum");
      continue;
    }
    if (tok.size() != 2) throw ParseError(line_no, "expected tree edge '<bag> <bag>'");
    long long a = to_int(tok[0], line_no), b = to_int(tok[1], line_no);
    if (a < 1 || b < 1 || a > td.num_bags() || b > td.num_bags()) throw ParseError(line_no, "tree edge bag out of range");
    td.tree_edges.emplace_back(static_cast<int>(a - 1), static_cast<int>(b - 1));
  }
  if (!header) throw ParseError(line_no, "missing header");
  for (int b = 0; b < td.num_bags(); ++b)
    if (!seen[b]) throw ParseError(line_no, "bag " + std::to_string(b + 1) + " missing (bag count mismatch)");
  return td;
}

TreeDecomposition load_td_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_td(in);
}

std::string save_td(const TreeDecomposition& td) {
  std::ostringstream out;
  out << "s td " << td.num_bags() << ' ' << td.width() + 1 << ' ' << td.n << '\n';
  for (int b = 0; b < td.num_bags(); ++b) {
    out << "b " << b + 1;
    for (int v : td.bags[b]) out << ' ' << v;
    out << '\n';
  }
  for (auto [a, b] : td.tree_edges) out << a + 1 << ' ' << b + 1 << '\n';
  return out.str();
}

namespace {

// Simple undirected adjacency (no loops, no parallel edges), sorted lists.
std::vector<std::vector<int>> simple_adjacency(const WeightedGraph& g) {
  std::vector<std::vector<int>> adj(g.n + 1);
  for (const auto& e : g.edges) {
    if (e.tail == e.head) continue;
    adj[e.tail].push_back(e.head);
    adj[e.head].push_back(e.tail);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

void insert_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

void erase_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

constexpr size_t kFillDegreeCap = 64;

long long fill_score(const std::vector<std::vector<int>>& adj, int v) {
  const auto& nb = adj[v];
  if (nb.size() > kFillDegreeCap) return static_cast<long long>(nb.size()) * static_cast<long long>(nb.size());
  long long missing = 0;
  for (size_t i = 0; i < nb.size(); ++i)
    for (size_t j = i + 1; j < nb.size(); ++j)
      if (!sorted_contains(adj[nb[i]], nb[j])) ++missing;
  return missing;
}

}  // namespace

std::vector<int> min_fill_order(const WeightedGraph& g) {
  auto adj = simple_adjacency(g);
  using Key = std::tuple<long long, size_t, int>;
  std::set<Key> queue;
  std::vector<Key> key(g.n + 1);
  std::vector<bool> gone(g.n + 1, false);
  for (int v = 1; v <= g.n; ++v) {
    key[v] = {fill_score(adj, v), adj[v].size(), v};
    queue.insert(key[v]);
  }
  std::vector<int> order;
  order.reserve(g.n);
  while (!queue.empty()) {
    int v = std::get<2>(*queue.begin());
    queue.erase(queue.begin());
    gone[v] = true;
    order.push_back(v);
    const std::vector<int> nb = adj[v];
    for (size_t i = 0; i < nb.size(); ++i) {
      erase_sorted(adj[nb[i]], v);
      for (size_t j = i + 1; j < nb.size(); ++j) {
        insert_sorted(adj[nb[i]], nb[j]);
        insert_sorted(adj[nb[j]], nb[i]);
      }
    }
    adj[v].clear();
    std::vector<int> touched = nb;
    for (int u : nb)
      for (int w : adj[u]) touched.push_back(w);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int u : touched) {
      if (gone[u]) continue;
      Key k{fill_score(adj, u), adj[u].size(), u};
      if (k != key[u]) {
        queue.erase(key[u]);
        key[u] = k;
        queue.insert(k);
      }
    }
  }
  return order;
}

TreeDecomposition elimination_decomposition(const WeightedGraph& g, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != g.n) throw std::invalid_argument("elimination order must list every vertex once");
  std::vector<int> pos(g.n + 1, -1);
  for (int i = 0; i < g.n; ++i) {
    int v = order[i];
    if (v < 1 || v > g.n || pos[v] != -1) throw std::invalid_argument("elimination order must list every vertex once");
    pos[v] = i;
  }
  auto adj = simple_adjacency(g);
  TreeDecomposition td;
  td.n = g.n;
  td.bags.resize(g.n);
  std::vector<int> roots;
  for (int i = 0; i < g.n; ++i) {
    int v = order[i];
    std::vector<int> later;
    for (int u : adj[v])
      if (pos[u] > i) later.push_back(u);
    for (size_t a = 0; a < later.size(); ++a)
      for (size_t b = a + 1; b < later.size(); ++b) {
        insert_sorted(adj[later[a]], later[b]);
        insert_sorted(adj[later[b]], later[a]);
      }
    auto& bag = td.bags[i];
    bag = later;
    bag.push_back(v);
    std::sort(bag.begin(), bag.end());
    if (later.empty()) {
      roots.push_back(i);
    } else {
      int next = *std::min_element(later.begin(), later.end(), [&](int a, int b) { return pos[a] < pos[b]; });
      td.tree_edges.emplace_back(pos[next], i);
    }
  }
  // Components are joined through their roots; the shared vertex sets are empty.
  for (size_t r = 1; r < roots.size(); ++r) td.tree_edges.emplace_back(roots[r - 1], roots[r]);
  if (!roots.empty()) td.root = roots.back();
  return td;
}

TreeDecomposition heuristic_decomposition(const WeightedGraph& g) {
  return elimination_decomposition(g, min_fill_order(g));
}

TreeDecomposition ShallowDecomposition::as_tree_decomposition() const {
  TreeDecomposition td;
  int n = 0;
  for (const auto& b : bags)
    for (int v : b) n = std::max(n, v);
  td.n = n;
  td.bags = bags;
  for (int u = 0; u < num_bags(); ++u)
    for (int c : children[u]) td.tree_edges.emplace_back(u, c);
  td.root = root;
  return td;
}

namespace {

class Balancer {
 public:
  Balancer(const TreeDecomposition& td) : td_(td), adj_(td.num_bags()), removed_(td.num_bags(), false),
                                          stamp_(td.num_bags(), 0), dist_(td.num_bags(), -1) {
    for (auto [a, b] : td.tree_edges) {
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  ShallowDecomposition run() {
    int root = td_.num_bags() == 0 ? new_node({}) : process(component_from(0), {});
    ShallowDecomposition sd;
    sd.bags = std::move(out_bags_);
    sd.children = std::move(out_children_);
    sd.parent.assign(sd.bags.size(), -1);
    for (int u = 0; u < sd.num_bags(); ++u)
      for (int c : sd.children[u]) sd.parent[c] = u;
    sd.root = root;
    return sd;
  }

 private:
  using Boundary = std::vector<std::pair<int, int>>;  // (inside node, outside node)

  // Nodes of the component reachable from start without crossing removed nodes, in BFS order.
  std::vector<int> component_from(int start) {
    ++current_stamp_;
    std::vector<int> comp{start};
    stamp_[start] = current_stamp_;
    for (size_t i = 0; i < comp.size(); ++i)
      for (int y : adj_[comp[i]])
        if (!removed_[y] && stamp_[y] != current_stamp_) {
          stamp_[y] = current_stamp_;
          comp.push_back(y);
        }
    return comp;
  }

  // Centroid of comp (which is in BFS order from comp[0]); ties broken by smallest id.
  int centroid(const std::vector<int>& comp) {
    const int total = static_cast<int>(comp.size());
    std::vector<int> idx_parent(comp.size(), -1), sub(comp.size(), 1);
    ++current_stamp_;
    for (size_t i = 0; i < comp.size(); ++i) local_[comp[i]] = static_cast<int>(i), stamp_[comp[i]] = current_stamp_;
    for (size_t i = 1; i < comp.size(); ++i) {
      for (int y : adj_[comp[i]])
        if (stamp_[y] == current_stamp_ && local_[y] < static_cast<int>(i)) {
          idx_parent[i] = local_[y];
          break;
        }
    }
    for (size_t i = comp.size(); i-- > 1;) sub[idx_parent[i]] += sub[i];
    std::vector<int> worst(comp.size(), 0);
    for (size_t i = 0; i < comp.size(); ++i) {
      worst[i] = total - sub[i];
      if (i > 0) worst[idx_parent[i]] = std::max(worst[idx_parent[i]], sub[i]);
    }
    int best = comp[0], best_worst = worst[0];
    for (size_t i = 1; i < comp.size(); ++i)
      if (worst[i] < best_worst || (worst[i] == best_worst && comp[i] < best)) best = comp[i], best_worst = worst[i];
    return best;
  }

  // Node on the x1..x2 tree path closest to g (ties: smallest id).
  int path_node_near(const std::vector<int>& comp, int x1, int x2, int g) {
    ++current_stamp_;
    for (int u : comp) stamp_[u] = current_stamp_, local_[u] = -1;
    std::vector<int> queue{x1};
    local_[x1] = x1;
    for (size_t i = 0; i < queue.size(); ++i)
      for (int y : adj_[queue[i]])
        if (stamp_[y] == current_stamp_ && local_[y] == -1) {
          local_[y] = queue[i];
          queue.push_back(y);
        }
    std::vector<int> path{x2};
    while (path.back() != x1) path.push_back(local_[path.back()]);
    std::set<int> path_set(path.begin(), path.end());
    for (int u : comp) dist_[u] = -1;
    std::vector<int> q{g};
    dist_[g] = 0;
    int found = -1, found_dist = -1;
    for (size_t i = 0; i < q.size(); ++i) {
      int u = q[i];
      if (found != -1 && dist_[u] > found_dist) break;
      if (path_set.count(u)) {
        if (found == -1 || u < found) found = u, found_dist = dist_[u];
      }
      for (int y : adj_[u])
        if (stamp_[y] == current_stamp_ && dist_[y] == -1) {
          dist_[y] = dist_[u] + 1;
          q.push_back(y);
        }
    }
    return found;
  }

  std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  int new_node(std::vector<int> bag) {
    out_bags_.push_back(std::move(bag));
    out_children_.emplace_back();
    return static_cast<int>(out_bags_.size()) - 1;
  }

  // Attaches the given subtrees below a node with the given bag, using weight-balanced copies.
  void attach(int node, const std::vector<std::pair<int, long long>>& subs, size_t lo, size_t hi) {
    // subs[lo, hi) go below node; node has room for two children
    if (hi - lo <= 2) {
      for (size_t i = lo; i < hi; ++i) out_children_[node].push_back(subs[i].first);
      return;
    }
    long long total = 0;
    for (size_t i = lo; i < hi; ++i) total += subs[i].second;
    long long acc = 0;
    size_t split = lo + 1;
    long long best = -1;
    for (size_t i = lo; i + 1 < hi; ++i) {
      acc += subs[i].second;
      long long diff = std::llabs(total - 2 * acc);
      if (best < 0 || diff < best) best = diff, split = i + 1;
    }
    for (auto [a, b] : {std::pair{lo, split}, std::pair{split, hi}}) {
      if (b - a == 1) {
        out_children_[node].push_back(subs[a].first);
      } else {
        int copy = new_node(out_bags_[node]);
        out_children_[node].push_back(copy);
        attach(copy, subs, a, b);
      }
    }
  }

  int process(const std::vector<int>& comp, const Boundary& boundary) {
    int c;
    if (boundary.size() <= 1) {
      c = centroid(comp);
    } else {
      int g = centroid(comp);
      c = path_node_near(comp, boundary[0].first, boundary[1].first, g);
    }
    std::vector<int> bag = td_.bags[c];
    for (auto [x, y] : boundary) {
      auto shared = intersect(td_.bags[x], td_.bags[y]);
      std::vector<int> merged;
      std::set_union(bag.begin(), bag.end(), shared.begin(), shared.end(), std::back_inserter(merged));
      bag = std::move(merged);
    }
    int node = new_node(bag);
    removed_[c] = true;

    std::vector<std::pair<int, long long>> subs;
    for (int y : adj_[c]) {
      if (removed_[y]) continue;
      auto sub_comp = component_from(y);
      Boundary sub_boundary{{y, c}};
      for (auto [x, o] : boundary)
        if (x != c && stamp_[x] == current_stamp_) sub_boundary.emplace_back(x, o);
      long long weight = static_cast<long long>(sub_comp.size());
      int child = process(sub_comp, sub_boundary);
      subs.emplace_back(child, weight);
    }
    attach(node, subs, 0, subs.size());
    return node;
  }

  const TreeDecomposition& td_;
  std::vector<std::vector<int>> adj_;
  std::vector<bool> removed_;
  std::vector<int> stamp_;
  std::vector<int> dist_;
  std::vector<int> local_ = std::vector<int>(td_.num_bags(), -1);
  int current_stamp_ = 0;
  std::vector<std::vector<int>> out_bags_;
  std::vector<std::vector<int>> out_children_;
};

}  // namespace

ShallowDecomposition balance(const TreeDecomposition& td, const WeightedGraph& g) {
  auto report = validate(td, g);
  if (!report.valid()) throw std::invalid_argument("cannot balance an invalid decomposition: " + report.violations[0].message);
  ShallowDecomposition sd = Balancer(td).run();
  // depth by BFS from the root
  std::vector<int> depth(sd.num_bags(), 0);
  std::vector<int> queue{sd.root};
  for (size_t i = 0; i < queue.size(); ++i)
    for (int c : sd.children[queue[i]]) {
      depth[c] = depth[queue[i]] + 1;
      sd.depth = std::max(sd.depth, depth[c]);
      queue.push_back(c);
    }
  int w = -1;
  for (const auto& b : sd.bags) w = std::max(w, static_cast<int>(b.size()) - 1);
  sd.width = w;
  return sd;
}

}  // namespace kbest
