#include "kbest/problems.hpp"

#include <array>
#include <algorithm>
#include <bit>
#include <stdexcept>

namespace kbest {

std::optional<Problem> parse_problem(std::string_view name) {
  if (name == "simple-path") return Problem::SimplePath;
  if (name == "spanning-tree") return Problem::SpanningTree;
  if (name == "perfect-matching") return Problem::PerfectMatching;
  if (name == "vertex-cover") return Problem::VertexCover;
  return std::nullopt;
}

const char* problem_name(Problem p) {
  switch (p) {
    case Problem::SimplePath: return "simple-path";
    case Problem::SpanningTree: return "spanning-tree";
    case Problem::PerfectMatching: return "perfect-matching";
    case Problem::VertexCover: return "vertex-cover";
  }
  return "?";
}

FeatureKind problem_var_kind(Problem p) {
  return p == Problem::VertexCover ? FeatureKind::Vertex : FeatureKind::Edge;
}

std::unique_ptr<Automaton> builtin(Problem p, const ProblemParams& params) {
  switch (p) {
    case Problem::SimplePath:
      return std::make_unique<SimplePathAutomaton>(params.s, params.t, params.directed);
    case Problem::SpanningTree: return std::make_unique<SpanningTreeAutomaton>();
    case Problem::PerfectMatching: return std::make_unique<PerfectMatchingAutomaton>();
    case Problem::VertexCover: return std::make_unique<VertexCoverAutomaton>();
  }
  throw std::invalid_argument("unknown problem");
}

namespace {

using Bytes = std::vector<std::uint8_t>;

Solution empty_solution() { return Solution{{{}}}; }
Solution single(FeatureId x) { return Solution{{{x}}}; }

State to_state(const Bytes& b) { return State(b.begin(), b.end()); }
Bytes to_bytes(const State& s) { return Bytes(s.begin(), s.end()); }

// Renumbers block ids by first appearance.
void canonical_blocks(Bytes& b) {
  std::uint8_t map[256];
  std::fill(std::begin(map), std::end(map), 0xFF);
  std::uint8_t next = 0;
  for (auto& x : b) {
    if (map[x] == 0xFF) map[x] = next++;
    x = map[x];
  }
}

// Kept-position mask of a Permute node; throws unless alpha is injective.
std::vector<char> kept_positions(std::span<const int> alpha, size_t r) {
  std::vector<char> kept(r, 0);
  for (int a : alpha) {
    if (a < 0 || static_cast<size_t>(a) >= r || kept[a]) throw std::logic_error("permutation must be injective");
    kept[a] = 1;
  }
  return kept;
}

constexpr std::uint8_t kNone = 0;
constexpr std::uint8_t kLabelS = 62;
constexpr std::uint8_t kLabelT = 63;
constexpr int kMaxPathOrder = 61;
constexpr std::uint8_t kDone = 1;

bool is_position(std::uint8_t p) { return p != kNone && p < kLabelS; }

}  // namespace

// ---------------------------------------------------------------- simple path

SimplePathAutomaton::SimplePathAutomaton(int s, int t, bool directed) : s_(s), t_(t), directed_(directed) {
  if (s == t) throw std::invalid_argument("simple-path needs distinct endpoints");
}

namespace {

// Fixed-capacity byte row; avoids heap traffic in the hot combine path.
struct SmallBytes {
  std::array<std::uint8_t, kMaxPathOrder> b;
  std::uint8_t n = 0;
  size_t size() const { return n; }
  std::uint8_t& operator[](size_t k) { return b[k]; }
  std::uint8_t operator[](size_t k) const { return b[k]; }
  void push_back(std::uint8_t x) {
    if (n == b.size()) throw std::length_error("too many sources for simple-path states");
    b[n++] = x;
  }
  void erase(size_t k) {
    std::copy(b.begin() + k + 1, b.begin() + n, b.begin() + k);
    --n;
  }
  const std::uint8_t* begin() const { return b.data(); }
  const std::uint8_t* end() const { return b.data() + n; }
};

struct PathState {
  SmallBytes deg, par;
  bool done = false;

  static PathState decode(const State& q) {
    PathState p;
    size_t r = q.size() - 1;
    if (r > static_cast<size_t>(kMaxPathOrder)) throw std::length_error("too many sources for simple-path states");
    p.deg.n = p.par.n = static_cast<std::uint8_t>(r);
    for (size_t k = 0; k < r; ++k) {
      auto b = static_cast<std::uint8_t>(q[k]);
      p.deg[k] = b & 3;
      p.par[k] = b >> 2;
    }
    p.done = static_cast<std::uint8_t>(q[r]) & kDone;
    return p;
  }
  State encode() const {
    if (deg.size() > static_cast<size_t>(kMaxPathOrder)) throw std::length_error("too many sources for simple-path states");
    State q(deg.size() + 1, '\0');
    for (size_t k = 0; k < deg.size(); ++k) q[k] = static_cast<char>(deg[k] | par[k] << 2);
    q.back() = static_cast<char>(done ? kDone : 0);
    return q;
  }
};

}  // namespace

std::vector<Automaton::LeafState> SimplePathAutomaton::leaf_states(const ParseTree& t, NodeId leaf) const {
  const ParseNode& n = t.node(leaf);
  switch (n.kind) {
    case OpKind::Const0: return {{State(1, '\0'), {empty_solution()}}};
    case OpKind::Const1: return {{State(2, '\0'), {empty_solution()}}};
    case OpKind::ConstEdge: {
      std::vector<LeafState> out{{State(3, '\0'), {empty_solution()}}};
      auto src = t.sources(leaf);
      int a = src[0], b = src[1];
      if (a == b) return out;
      PathState p;
      p.par.push_back(2);
      p.par.push_back(1);
      if (directed_) {
        if (n.label != EdgeLabel::Forward) throw std::invalid_argument("directed simple-path needs directed edges");
        if (a == t_ || b == s_) return out;
        p.deg.push_back(2);  // bit 1 = out, bit 0 = in
        p.deg.push_back(1);
      } else {
        p.deg.push_back(1);
        p.deg.push_back(1);
      }
      out.push_back({p.encode(), {single(FeatureId::edge(n.feature))}});
      return out;
    }
    default: throw std::invalid_argument("leaf_states on an inner node");
  }
}

std::optional<State> SimplePathAutomaton::combine(const ParseTree& t, NodeId u, const State& left,
                                                  const State& right) const {
  const ParseNode& n = t.node(u);
  auto count = [&](std::uint8_t d) { return directed_ ? std::popcount(d) : static_cast<int>(d); };

  if (n.kind == OpKind::Disjoint) {
    // Works on the encoding directly: concatenate, shifting partner positions.
    const size_t rl = left.size() - 1, rr = right.size() - 1;
    const bool dl = static_cast<std::uint8_t>(left[rl]) & kDone, dr = static_cast<std::uint8_t>(right[rr]) & kDone;
    auto has_edges = [](const State& q, size_t r) {
      for (size_t k = 0; k < r; ++k)
        if (static_cast<std::uint8_t>(q[k]) & 3) return true;
      return false;
    };
    if (dl && dr) return std::nullopt;
    if ((dl && has_edges(right, rr)) || (dr && has_edges(left, rl))) return std::nullopt;
    if (rl + rr > static_cast<size_t>(kMaxPathOrder)) throw std::length_error("too many sources for simple-path states");
    State q(rl + rr + 1, '\0');
    std::copy(left.begin(), left.begin() + rl, q.begin());
    for (size_t k = 0; k < rr; ++k) {
      auto b = static_cast<std::uint8_t>(right[k]);
      std::uint8_t par = b >> 2;
      if (is_position(par)) par = static_cast<std::uint8_t>(par + rl);
      q[rl + k] = static_cast<char>((b & 3) | par << 2);
    }
    q.back() = static_cast<char>(dl || dr ? kDone : 0);
    return q;
  }

  PathState p = PathState::decode(left);
  auto open_end = [&]() {
    for (auto d : p.deg)
      if (count(d) == 1) return true;
    return false;
  };

  switch (n.kind) {
    case OpKind::Fuse: {
      const int i = n.fuse_i, j = n.fuse_j;
      const int v = t.sources(n.child[0])[i];
      const std::uint8_t di = p.deg[i], dj = p.deg[j];
      std::uint8_t d;
      if (directed_) {
        if (di & dj) return std::nullopt;
        d = di | dj;
        if ((v == s_ && (d & 1)) || (v == t_ && (d & 2))) return std::nullopt;
      } else {
        d = di + dj;
        if (d > 2 || ((v == s_ || v == t_) && d > 1)) return std::nullopt;
      }
      const std::uint8_t pi = p.par[i], pj = p.par[j];
      if (count(di) == 1 && count(dj) == 1) {
        if (pi == j + 1) return std::nullopt;  // closes a cycle
        if (!is_position(pi) && !is_position(pj)) {
          if (pi == pj || p.done) return std::nullopt;
          p.done = true;
        } else {
          if (is_position(pi)) p.par[pi - 1] = pj;
          if (is_position(pj)) p.par[pj - 1] = pi;
        }
        p.par[i] = kNone;
      } else if (count(dj) == 1) {
        p.par[i] = pj;
        if (is_position(pj)) p.par[pj - 1] = static_cast<std::uint8_t>(i + 1);
      } else if (count(di) != 1) {
        p.par[i] = kNone;
      }
      p.deg[i] = d;
      p.deg.erase(j);
      p.par.erase(j);
      for (size_t k = 0; k < p.par.size(); ++k) {
        auto& x = p.par[k];
        if (x == j + 1) throw std::logic_error("dangling fragment end after fuse");
        if (is_position(x) && x > j + 1) --x;
      }
      if (p.done && open_end()) return std::nullopt;
      return p.encode();
    }
    case OpKind::Permute: {
      auto src = t.sources(n.child[0]);
      auto alpha = t.alpha(u);
      std::array<char, kMaxPathOrder> kept;
      std::fill_n(kept.begin(), p.deg.size(), 0);
      for (int a : alpha) {
        if (a < 0 || static_cast<size_t>(a) >= p.deg.size() || kept[a]) throw std::logic_error("permutation must be injective");
        kept[a] = 1;
      }
      const std::uint8_t s_deg = directed_ ? 2 : 1, t_deg = 1;
      for (size_t x = 0; x < p.deg.size(); ++x) {
        if (kept[x]) continue;
        const int v = src[x];
        const std::uint8_t px = p.par[x];
        if (v == s_ || v == t_) {
          bool is_s = v == s_;
          if (p.deg[x] != (is_s ? s_deg : t_deg)) return std::nullopt;
          const std::uint8_t mine = is_s ? kLabelS : kLabelT, other = is_s ? kLabelT : kLabelS;
          if (is_position(px)) {
            p.par[px - 1] = mine;
          } else if (px == other) {
            if (p.done) return std::nullopt;
            p.done = true;
          } else {
            throw std::logic_error("path endpoint without partner");
          }
        } else if (count(p.deg[x]) == 1) {
          return std::nullopt;
        }
      }
      std::array<int, kMaxPathOrder> inv;
      inv.fill(-1);
      for (size_t k = 0; k < alpha.size(); ++k) inv[alpha[k]] = static_cast<int>(k);
      PathState out;
      out.done = p.done;
      for (int a : alpha) {
        out.deg.push_back(p.deg[a]);
        std::uint8_t px = p.par[a];
        if (is_position(px)) {
          if (inv[px - 1] < 0) throw std::logic_error("fragment end points at a dropped source");
          px = static_cast<std::uint8_t>(inv[px - 1] + 1);
        }
        out.par.push_back(px);
      }
      p = out;
      if (p.done && open_end()) return std::nullopt;
      return p.encode();
    }
    default: throw std::invalid_argument("combine on a leaf");
  }
}

State SimplePathAutomaton::root_state() const { return State(1, static_cast<char>(kDone)); }

std::string SimplePathAutomaton::describe(const State& q) const {
  PathState p = PathState::decode(q);
  std::string out = "[";
  for (size_t k = 0; k < p.deg.size(); ++k) {
    if (k) out += ' ';
    out += "d" + std::to_string(p.deg[k]);
    if (p.par[k] == kLabelS) out += "->s";
    else if (p.par[k] == kLabelT) out += "->t";
    else if (p.par[k] != kNone) out += "->" + std::to_string(p.par[k]);
  }
  return out + (p.done ? " done]" : "]");
}

// -------------------------------------------------------------- spanning tree

std::vector<Automaton::LeafState> SpanningTreeAutomaton::leaf_states(const ParseTree& t, NodeId leaf) const {
  const ParseNode& n = t.node(leaf);
  switch (n.kind) {
    case OpKind::Const0: return {{State(1, '\0'), {empty_solution()}}};
    case OpKind::Const1: return {{State(2, '\0'), {empty_solution()}}};
    case OpKind::ConstEdge:
      return {{to_state({0, 1, 0}), {empty_solution()}},
              {to_state({0, 0, 0}), {single(FeatureId::edge(n.feature))}}};
    default: throw std::invalid_argument("leaf_states on an inner node");
  }
}

std::optional<State> SpanningTreeAutomaton::combine(const ParseTree& t, NodeId u, const State& left,
                                                    const State& right) const {
  const ParseNode& n = t.node(u);
  Bytes b = to_bytes(left);
  bool done = b.back() & kDone;
  b.pop_back();
  switch (n.kind) {
    case OpKind::Disjoint: {
      Bytes c = to_bytes(right);
      bool done_r = c.back() & kDone;
      c.pop_back();
      if ((done && (done_r || !c.empty())) || (done_r && !b.empty())) return std::nullopt;
      std::uint8_t shift = 0;
      for (auto x : b) shift = std::max<std::uint8_t>(shift, x + 1);
      for (auto x : c) b.push_back(static_cast<std::uint8_t>(x + shift));
      done = done || done_r;
      break;
    }
    case OpKind::Fuse: {
      const std::uint8_t bi = b[n.fuse_i], bj = b[n.fuse_j];
      if (bi == bj) return std::nullopt;
      for (auto& x : b)
        if (x == bj) x = bi;
      b.erase(b.begin() + n.fuse_j);
      break;
    }
    case OpKind::Permute: {
      auto alpha = t.alpha(u);
      auto kept = kept_positions(alpha, b.size());
      std::vector<char> alive(256, 0), closed(256, 0);
      for (size_t x = 0; x < b.size(); ++x)
        if (kept[x]) alive[b[x]] = 1;
      for (size_t x = 0; x < b.size(); ++x) {
        if (kept[x] || alive[b[x]] || closed[b[x]]) continue;
        if (done || !alpha.empty()) return std::nullopt;
        closed[b[x]] = 1;
        done = true;
      }
      Bytes out;
      for (int a : alpha) out.push_back(b[a]);
      b = std::move(out);
      break;
    }
    default: throw std::invalid_argument("combine on a leaf");
  }
  canonical_blocks(b);
  b.push_back(done ? kDone : 0);
  return to_state(b);
}

State SpanningTreeAutomaton::root_state() const { return State(1, static_cast<char>(kDone)); }

// ----------------------------------------------------------- perfect matching

std::vector<Automaton::LeafState> PerfectMatchingAutomaton::leaf_states(const ParseTree& t, NodeId leaf) const {
  const ParseNode& n = t.node(leaf);
  switch (n.kind) {
    case OpKind::Const0: return {{State(), {empty_solution()}}};
    case OpKind::Const1: return {{State(1, '\0'), {empty_solution()}}};
    case OpKind::ConstEdge:
      return {{to_state({0, 0}), {empty_solution()}}, {to_state({1, 1}), {single(FeatureId::edge(n.feature))}}};
    default: throw std::invalid_argument("leaf_states on an inner node");
  }
}

std::optional<State> PerfectMatchingAutomaton::combine(const ParseTree& t, NodeId u, const State& left,
                                                       const State& right) const {
  const ParseNode& n = t.node(u);
  Bytes b = to_bytes(left);
  switch (n.kind) {
    case OpKind::Disjoint: return left + right;
    case OpKind::Fuse: {
      int d = b[n.fuse_i] + b[n.fuse_j];
      if (d > 1) return std::nullopt;
      b[n.fuse_i] = static_cast<std::uint8_t>(d);
      b.erase(b.begin() + n.fuse_j);
      return to_state(b);
    }
    case OpKind::Permute: {
      auto alpha = t.alpha(u);
      auto kept = kept_positions(alpha, b.size());
      for (size_t x = 0; x < b.size(); ++x)
        if (!kept[x] && b[x] != 1) return std::nullopt;
      Bytes out;
      for (int a : alpha) out.push_back(b[a]);
      return to_state(out);
    }
    default: throw std::invalid_argument("combine on a leaf");
  }
}

// --------------------------------------------------------------- vertex cover

namespace {
constexpr std::uint8_t kClaim = 1;
constexpr std::uint8_t kIntro = 2;
}  // namespace

std::vector<Automaton::LeafState> VertexCoverAutomaton::leaf_states(const ParseTree& t, NodeId leaf) const {
  const ParseNode& n = t.node(leaf);
  switch (n.kind) {
    case OpKind::Const0: return {{State(), {empty_solution()}}};
    case OpKind::Const1:
      if (n.introduces)
        return {{to_state({kIntro}), {empty_solution()}},
                {to_state({kIntro | kClaim}), {single(FeatureId::vertex(n.feature))}}};
      return {{to_state({0}), {empty_solution()}}, {to_state({kClaim}), {empty_solution()}}};
    case OpKind::ConstEdge:
      return {{to_state({0, kClaim}), {empty_solution()}},
              {to_state({kClaim, 0}), {empty_solution()}},
              {to_state({kClaim, kClaim}), {empty_solution()}}};
    default: throw std::invalid_argument("leaf_states on an inner node");
  }
}

std::optional<State> VertexCoverAutomaton::combine(const ParseTree& t, NodeId u, const State& left,
                                                   const State& right) const {
  const ParseNode& n = t.node(u);
  Bytes b = to_bytes(left);
  switch (n.kind) {
    case OpKind::Disjoint: return left + right;
    case OpKind::Fuse: {
      const std::uint8_t x = b[n.fuse_i], y = b[n.fuse_j], z = static_cast<std::uint8_t>(right.at(0));
      if ((x & kClaim) != (y & kClaim) || (x & kClaim) != (z & kClaim)) return std::nullopt;
      int intros = (x >> 1) + (y >> 1) + (z >> 1);
      if (intros > 1) return std::nullopt;
      b[n.fuse_i] = static_cast<std::uint8_t>((x & kClaim) | (intros ? kIntro : 0));
      b.erase(b.begin() + n.fuse_j);
      return to_state(b);
    }
    case OpKind::Permute: {
      auto alpha = t.alpha(u);
      auto kept = kept_positions(alpha, b.size());
      for (size_t x = 0; x < b.size(); ++x)
        if (!kept[x] && !(b[x] & kIntro)) return std::nullopt;
      Bytes out;
      for (int a : alpha) out.push_back(b[a]);
      return to_state(out);
    }
    default: throw std::invalid_argument("combine on a leaf");
  }
}

}  // namespace kbest
