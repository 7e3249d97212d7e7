#include "kbest/automaton.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace kbest {

std::string Automaton::describe(const State& q) const {
  std::string out;
  for (unsigned char ch : q) {
    if (!out.empty()) out += ' ';
    out += std::to_string(ch);
  }
  return "[" + out + "]";
}

std::optional<FeatureId> StateTable::leaf_feature(const ParseTree& t, NodeId u) {
  const ParseNode& n = t.node(u);
  if (n.kind == OpKind::ConstEdge) return FeatureId::edge(n.feature);
  if (n.kind == OpKind::Const1 && n.introduces) return FeatureId::vertex(n.feature);
  return std::nullopt;
}

Solution StateTable::mask_solution(std::uint32_t mask, FeatureId x, int n_free) {
  Solution s;
  s.sets.resize(n_free);
  for (int v = 0; v < n_free; ++v)
    if (mask >> v & 1u) s.sets[v].push_back(x);
  return s;
}

Weight mask_value(std::uint32_t mask, std::optional<FeatureId> x, const CostModel& c) {
  Weight total = 0;
  if (!x) return 0;
  for (int v = 0; v < c.n_free(); ++v)
    if (mask >> v & 1u) total = add_ext(total, c.cost(v, *x));
  return total;
}

namespace {

std::uint32_t solution_mask(const Solution& s, std::optional<FeatureId> x, const std::vector<FeatureKind>& types) {
  if (s.sets.size() != types.size()) throw std::logic_error("leaf solution has the wrong number of variables");
  std::uint32_t mask = 0;
  for (size_t v = 0; v < s.sets.size(); ++v) {
    const auto& set = s.sets[v];
    if (set.empty()) continue;
    if (set.size() != 1 || !x || set[0] != *x || x->kind != types[v])
      throw std::logic_error("leaf solution mentions a feature the leaf does not introduce");
    mask |= 1u << v;
  }
  return mask;
}

}  // namespace

StateTable StateTable::build(const ParseTree& t, const Automaton& a) { return build_impl(t, a, false); }

StateTable StateTable::build_with_names(const ParseTree& t, const Automaton& a) { return build_impl(t, a, true); }

StateTable StateTable::build_impl(const ParseTree& t, const Automaton& a, bool keep_names) {
  const int N = t.size();
  const auto types = a.var_types();
  if (types.size() > 31) throw std::invalid_argument("too many free variables");

  // Bottom-up pass over flat arrays. Local states of node u occupy
  // [node_begin[u], node_begin[u + 1]); each has a pair range (inner nodes)
  // or a solution range (leaves).
  std::vector<std::size_t> node_begin(N + 1, 0);
  std::vector<std::size_t> pair_begin{0}, sol_begin{0};
  std::vector<FittingPair> pairs;
  std::vector<std::uint32_t> sols;
  std::vector<std::size_t> mask_begin(N + 1, 0);
  std::vector<std::uint32_t> masks;
  std::vector<std::vector<State>> names(N);

  struct Raw {
    State q;
    std::uint32_t i1, i2;
  };
  std::vector<Raw> raw;
  std::vector<std::uint32_t> order;

  for (NodeId u = 0; u < N; ++u) {
    const ParseNode& n = t.node(u);
    if (n.is_leaf()) {
      auto opts = a.leaf_states(t, u);
      std::sort(opts.begin(), opts.end(), [](const auto& x, const auto& y) { return x.state < y.state; });
      auto x = leaf_feature(t, u);
      std::vector<std::uint32_t> all;
      std::vector<std::vector<std::uint32_t>> per_state;
      for (size_t k = 0; k < opts.size(); ++k) {
        if (k && opts[k].state == opts[k - 1].state) throw std::logic_error("duplicate leaf state");
        std::vector<std::uint32_t> ms;
        for (const auto& s : opts[k].solutions) ms.push_back(solution_mask(s, x, types));
        std::sort(ms.begin(), ms.end());
        if (std::adjacent_find(ms.begin(), ms.end()) != ms.end()) throw std::logic_error("duplicate leaf solution");
        if (ms.empty()) throw std::logic_error("leaf state without solutions");
        all.insert(all.end(), ms.begin(), ms.end());
        per_state.push_back(std::move(ms));
      }
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      for (size_t k = 0; k < opts.size(); ++k) {
        for (auto m : per_state[k])
          sols.push_back(static_cast<std::uint32_t>(std::lower_bound(all.begin(), all.end(), m) - all.begin()));
        sol_begin.push_back(sols.size());
        pair_begin.push_back(pairs.size());
        names[u].push_back(std::move(opts[k].state));
      }
      masks.insert(masks.end(), all.begin(), all.end());
    } else {
      const auto& s1 = names[n.child[0]];
      const auto& s2 = names[n.child[1]];
      raw.clear();
      for (std::uint32_t i1 = 0; i1 < s1.size(); ++i1)
        for (std::uint32_t i2 = 0; i2 < s2.size(); ++i2)
          if (auto q = a.combine(t, u, s1[i1], s2[i2])) raw.push_back({std::move(*q), i1, i2});
      order.resize(raw.size());
      for (std::uint32_t k = 0; k < raw.size(); ++k) order[k] = k;
      // Raw entries are generated in (i1, i2) order, so a stable sort by state
      // leaves each state's pairs in that order.
      std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) { return raw[x].q < raw[y].q; });
      for (std::uint32_t k : order) {
        if (names[u].empty() || raw[k].q != names[u].back()) {
          if (!names[u].empty()) {
            pair_begin.push_back(pairs.size());
            sol_begin.push_back(sols.size());
          }
          names[u].push_back(std::move(raw[k].q));
        }
        pairs.push_back({raw[k].i1, raw[k].i2});
      }
      if (!names[u].empty()) {
        pair_begin.push_back(pairs.size());
        sol_begin.push_back(sols.size());
      }
      if (!keep_names) {
        std::vector<State>().swap(names[n.child[0]]);
        std::vector<State>().swap(names[n.child[1]]);
      }
    }
    node_begin[u + 1] = node_begin[u] + names[u].size();
    mask_begin[u + 1] = masks.size();
  }
  const std::size_t total = node_begin[N];

  StateTable st;
  st.n_free_ = static_cast<int>(types.size());
  const NodeId root = t.root();
  int root_q = -1;
  if (root != kNoNode) {
    const auto& rs = names[root];
    auto it = std::lower_bound(rs.begin(), rs.end(), a.root_state());
    if (it != rs.end() && *it == a.root_state()) root_q = static_cast<int>(it - rs.begin());
  }

  // Top-down relevance; parents have larger ids than their children.
  std::vector<char> relevant(total, 0);
  if (root_q >= 0) relevant[node_begin[root] + root_q] = 1;
  for (NodeId u = N - 1; u >= 0; --u) {
    const ParseNode& n = t.node(u);
    if (n.is_leaf()) continue;
    const std::size_t b0 = node_begin[n.child[0]], b1 = node_begin[n.child[1]];
    for (std::size_t g = node_begin[u]; g < node_begin[u + 1]; ++g) {
      if (!relevant[g]) continue;
      for (std::size_t k = pair_begin[g]; k < pair_begin[g + 1]; ++k) {
        relevant[b0 + pairs[k].left] = 1;
        relevant[b1 + pairs[k].right] = 1;
      }
    }
  }

  // Compact to the relevant states.
  std::vector<std::uint32_t> remap(total, UINT32_MAX);
  for (NodeId u = 0; u < N; ++u) {
    std::uint32_t next = 0;
    for (std::size_t g = node_begin[u]; g < node_begin[u + 1]; ++g)
      if (relevant[g]) remap[g] = next++;
  }
  st.state_begin_.assign(N + 1, 0);
  st.mask_begin_.assign(N + 1, 0);
  st.pair_begin_.push_back(0);
  st.sol_begin_.push_back(0);
  if (keep_names) st.names_.resize(N);
  for (NodeId u = 0; u < N; ++u) {
    const ParseNode& n = t.node(u);
    int kept = 0;
    for (std::size_t g = node_begin[u]; g < node_begin[u + 1]; ++g) {
      if (!relevant[g]) continue;
      ++kept;
      if (keep_names) st.names_[u].push_back(names[u][g - node_begin[u]]);
      if (n.is_leaf()) {
        st.sol_index_.insert(st.sol_index_.end(), sols.begin() + sol_begin[g], sols.begin() + sol_begin[g + 1]);
      } else {
        const std::size_t b0 = node_begin[n.child[0]], b1 = node_begin[n.child[1]];
        for (std::size_t k = pair_begin[g]; k < pair_begin[g + 1]; ++k)
          st.pairs_.push_back({remap[b0 + pairs[k].left], remap[b1 + pairs[k].right]});
      }
      st.pair_begin_.push_back(st.pairs_.size());
      st.sol_begin_.push_back(st.sol_index_.size());
    }
    if (n.is_leaf() && kept > 0)
      st.masks_.insert(st.masks_.end(), masks.begin() + mask_begin[u], masks.begin() + mask_begin[u + 1]);
    st.state_begin_[u + 1] = st.state_begin_[u] + kept;
    st.mask_begin_[u + 1] = st.masks_.size();
    st.max_states_ = std::max(st.max_states_, kept);
  }
  st.root_state_ = root_q >= 0 ? static_cast<int>(remap[node_begin[root] + root_q]) : -1;
  return st;
}

}  // namespace kbest
