#include "kbest/engine.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace kbest {

std::vector<Constraint> Version::constraint_list() const {
  std::vector<Constraint> out;
  for (const ConstraintLink* l = constraints; l; l = l->next) out.push_back(l->c);
  std::reverse(out.begin(), out.end());
  return out;
}

template <class T>
T* EvaluationEngine::alloc(std::size_t n) {
  if (n == 0) return nullptr;
  return static_cast<T*>(arena_.allocate(n * sizeof(T), alignof(T)));
}

EvaluationEngine::EvaluationEngine(const ParseTree& t, const StateTable& st, const CostModel& c)
    : t_(t), st_(st), c_(c) {
  const int N = t.size();
  nodes_.resize(N);
  entries_.resize(st.total_states());
  leaf_off_.assign(N + 1, 0);

  // Leaf solutions sorted by (value, solution); a solution's id is its position.
  std::vector<std::size_t> list_base(N, 0);
  for (NodeId u = 0; u < N; ++u) {
    leaf_off_[u] = static_cast<std::uint32_t>(sorted_masks_.size());
    if (!t.node(u).is_leaf()) continue;
    auto x = StateTable::leaf_feature(t, u);
    auto masks = st.leaf_masks(u);
    std::vector<std::uint32_t> order(masks.size());
    std::iota(order.begin(), order.end(), 0u);
    std::vector<Weight> val(masks.size());
    for (size_t i = 0; i < masks.size(); ++i) val[i] = mask_value(masks[i], x, c);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (val[a] != val[b]) return val[a] < val[b];
      if (!x) return masks[a] < masks[b];
      return StateTable::mask_solution(masks[a], *x, st.n_free()) <
             StateTable::mask_solution(masks[b], *x, st.n_free());
    });
    std::vector<std::uint32_t> pos(masks.size());
    for (size_t k = 0; k < order.size(); ++k) {
      pos[order[k]] = static_cast<std::uint32_t>(k);
      sorted_masks_.push_back(masks[order[k]]);
      sorted_values_.push_back(val[order[k]]);
    }
    list_base[u] = list_begin_.size();
    for (int q = 0; q < st.num_states(u); ++q) {
      list_begin_.push_back(static_cast<std::uint32_t>(lists_.size()));
      std::vector<std::uint32_t> l;
      for (auto i : st.leaf_state_solutions(u, q)) l.push_back(pos[i]);
      std::sort(l.begin(), l.end());
      lists_.insert(lists_.end(), l.begin(), l.end());
    }
    list_begin_.push_back(static_cast<std::uint32_t>(lists_.size()));
  }
  leaf_off_[N] = static_cast<std::uint32_t>(sorted_masks_.size());

  std::size_t off = 0;
  for (NodeId u = 0; u < N; ++u) {
    const ParseNode& n = t.node(u);
    EvalNode& e = nodes_[u];
    e.parse = u;
    e.n_states = static_cast<std::uint32_t>(st.num_states(u));
    e.entries = entries_.data() + off;
    Entry* out = entries_.data() + off;
    off += e.n_states;
    if (n.is_leaf()) {
      e.list_begin = list_begin_.data() + list_base[u];
      e.list = lists_.data();
      eval_leaf(u, e.n_states, e.list_begin, e.list, out, nullptr);
    } else {
      e.child[0] = &nodes_[n.child[0]];
      e.child[1] = &nodes_[n.child[1]];
      eval_inner(u, e.child[0], e.child[1], out, nullptr);
    }
  }
}

void EvaluationEngine::eval_leaf(NodeId u, std::uint32_t n_states, const std::uint32_t* begin,
                                 const std::uint32_t* list, Entry* out, const Preferred* pref) const {
  for (std::uint32_t q = 0; q < n_states; ++q) {
    Entry e;
    const std::uint32_t* first = list + begin[q];
    const std::uint32_t* last = list + begin[q + 1];
    std::uint32_t ranked[2];
    int have = 0;
    if (pref && pref->q == q) {
      if (!std::binary_search(first, last, pref->choice.pair))
        throw std::logic_error("preferred leaf solution was filtered out");
      ranked[have++] = pref->choice.pair;
    }
    for (const std::uint32_t* p = first; p != last && have < 2; ++p)
      if (have == 0 || *p != ranked[0]) ranked[have++] = *p;
    for (int r = 0; r < have; ++r) {
      e.choice[r].pair = ranked[r];
      e.id[r] = ranked[r];
    }
    if (have > 0) e.best = leaf_value(u, ranked[0]);
    if (have > 1) e.second = leaf_value(u, ranked[1]);
    if (pref && pref->q == q && have > 0 && first != last && e.best != leaf_value(u, *first))
      throw std::logic_error("preferred leaf solution is not optimal");
    out[q] = e;
  }
}

namespace {

struct Candidate {
  Weight value = kInf;
  Choice c;
};

}  // namespace

void EvaluationEngine::eval_inner(NodeId u, const EvalNode* c0, const EvalNode* c1, Entry* out,
                                  const Preferred* pref) const {
  const std::uint32_t S = static_cast<std::uint32_t>(st_.num_states(u));
  const Entry* a = c0->entries;
  const Entry* b = c1->entries;
  for (std::uint32_t q = 0; q < S; ++q) {
    auto pairs = st_.pairs(u, q);
    Candidate top[2];
    const bool has_pref = pref && pref->q == q;
    Candidate forced;
    if (has_pref) {
      const Choice& pc = pref->choice;
      const FittingPair& fp = pairs[pc.pair];
      forced.value = add_ext(a[fp.left].value(pc.r1), b[fp.right].value(pc.r2));
      forced.c = pc;
      top[0] = forced;
    }
    auto offer = [&](Weight v, std::uint32_t p, std::uint8_t r1, std::uint8_t r2) {
      if (v == kInf) return;
      if (has_pref) {
        if (v < forced.value) throw std::logic_error("preferred decomposition is not optimal");
        if (p == forced.c.pair && r1 == forced.c.r1 && r2 == forced.c.r2) return;
        if (v < top[1].value) top[1] = {v, {p, r1, r2}};
        return;
      }
      // Candidates arrive in lexicographic (pair, r1, r2) order, so strict
      // comparison keeps the canonical choice among equal values.
      if (v < top[0].value) {
        top[1] = top[0];
        top[0] = {v, {p, r1, r2}};
      } else if (v < top[1].value) {
        top[1] = {v, {p, r1, r2}};
      }
    };
    for (std::uint32_t p = 0; p < pairs.size(); ++p) {
      const Entry& x = a[pairs[p].left];
      const Entry& y = b[pairs[p].right];
      if (x.best == kInf || y.best == kInf) continue;
      offer(add_ext(x.best, y.best), p, 1, 1);
      if (y.second != kInf) offer(add_ext(x.best, y.second), p, 1, 2);
      if (x.second != kInf) offer(add_ext(x.second, y.best), p, 2, 1);
    }
    Entry e;
    e.best = top[0].value;
    e.second = top[1].value;
    e.choice[0] = top[0].c;
    e.choice[1] = top[1].c;
    out[q] = e;
  }

  // Solution ids: compress the child id pairs over all finite entries.
  thread_local std::vector<std::uint64_t> keys;
  keys.clear();
  auto key_of = [&](std::uint32_t q, int r) {
    const Choice& ch = out[q].choice[r];
    const FittingPair& fp = st_.pairs(u, q)[ch.pair];
    return std::uint64_t{a[fp.left].id[ch.r1 - 1]} << 32 | b[fp.right].id[ch.r2 - 1];
  };
  for (std::uint32_t q = 0; q < S; ++q)
    for (int r = 0; r < 2; ++r)
      if (out[q].value(r + 1) != kInf) keys.push_back(key_of(q, r));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (std::uint32_t q = 0; q < S; ++q)
    for (int r = 0; r < 2; ++r)
      if (out[q].value(r + 1) != kInf)
        out[q].id[r] = static_cast<std::uint32_t>(std::lower_bound(keys.begin(), keys.end(), key_of(q, r)) - keys.begin());
}

Top2Value EvaluationEngine::best_pair(const Version& v) const {
  if (st_.root_state() < 0 || !v.root) return kTop2MergeIdentity;
  const Entry& e = v.root->entries[st_.root_state()];
  return {e.best, e.second};
}

Solution EvaluationEngine::reconstruct(const EvalNode* node, std::uint32_t q, int rank) const {
  if (rank != 1 && rank != 2) throw std::invalid_argument("rank must be 1 or 2");
  if (q >= node->n_states || node->entries[q].value(rank) == kInf)
    throw std::out_of_range("no solution of rank " + std::to_string(rank));
  Solution s;
  s.sets.resize(st_.n_free());
  struct Item {
    const EvalNode* n;
    std::uint32_t q;
    int r;
  };
  std::vector<Item> stack{{node, q, rank}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const Choice& ch = it.n->entries[it.q].choice[it.r - 1];
    if (!it.n->child[0]) {
      std::uint32_t mask = leaf_mask(it.n->parse, ch.pair);
      if (mask) {
        FeatureId x = *StateTable::leaf_feature(t_, it.n->parse);
        for (int v = 0; v < st_.n_free(); ++v)
          if (mask >> v & 1u) s.sets[v].push_back(x);
      }
      continue;
    }
    const FittingPair& fp = st_.pairs(it.n->parse, it.q)[ch.pair];
    stack.push_back({it.n->child[1], fp.right, ch.r2});
    stack.push_back({it.n->child[0], fp.left, ch.r1});
  }
  s.canonicalize();
  return s;
}

Solution EvaluationEngine::reconstruct(const Version& v, int rank) const {
  if (st_.root_state() < 0) throw std::out_of_range("infeasible instance has no solutions");
  return reconstruct(v.root, root_state(), rank);
}

PivotReport EvaluationEngine::pivot_query(const Version& v) const {
  Top2Value bp = best_pair(v);
  if (bp.second == kInf) throw std::invalid_argument("pivot query needs a version with two solutions");
  PivotReport rep;
  rep.root = v.root;
  PathStep step;
  step.node = v.root;
  step.q[0] = step.q[1] = root_state();
  step.r[0] = 1;
  step.r[1] = 2;
  for (;;) {
    const EvalNode* n = step.node;
    const Choice& ca = n->entries[step.q[0]].choice[step.r[0] - 1];
    const Choice& cb = n->entries[step.q[1]].choice[step.r[1] - 1];
    if (!n->child[0]) {
      std::uint32_t ma = leaf_mask(n->parse, ca.pair), mb = leaf_mask(n->parse, cb.pair);
      std::uint32_t diff = ma ^ mb;
      auto x = StateTable::leaf_feature(t_, n->parse);
      if (!diff || !x) throw std::logic_error("pivot descent reached a leaf without a difference");
      rep.var = std::countr_zero(diff);
      rep.feature = *x;
      rep.leaf = n;
      rep.path.push_back(step);
      return rep;
    }
    const FittingPair& fa = st_.pairs(n->parse, step.q[0])[ca.pair];
    const FittingPair& fb = st_.pairs(n->parse, step.q[1])[cb.pair];
    PathStep next;
    if (n->child[0]->entries[fa.left].id[ca.r1 - 1] != n->child[0]->entries[fb.left].id[cb.r1 - 1]) {
      step.dir = 0;
      next.q[0] = fa.left;
      next.q[1] = fb.left;
      next.r[0] = ca.r1;
      next.r[1] = cb.r1;
    } else if (n->child[1]->entries[fa.right].id[ca.r2 - 1] != n->child[1]->entries[fb.right].id[cb.r2 - 1]) {
      step.dir = 1;
      next.q[0] = fa.right;
      next.q[1] = fb.right;
      next.r[0] = ca.r2;
      next.r[1] = cb.r2;
    } else {
      throw std::logic_error("distinct solutions with identical child ids");
    }
    next.node = n->child[step.dir];
    rep.path.push_back(step);
    step = next;
  }
}

Version EvaluationEngine::constrain(const Version& v, const PivotReport& p, Polarity polarity) {
  if (p.root != v.root || p.path.empty() || p.path.front().node != v.root || p.path.back().node != p.leaf)
    throw std::invalid_argument("pivot report does not belong to this version");
  const std::uint32_t bit = 1u << p.var;
  auto allowed = [&](std::uint32_t mask) { return ((mask & bit) != 0) == (polarity == Polarity::Forced); };

  const PathStep& ls = p.path.back();
  const EvalNode* leaf = ls.node;
  std::uint32_t pos[2] = {leaf->entries[ls.q[0]].choice[ls.r[0] - 1].pair,
                          leaf->entries[ls.q[1]].choice[ls.r[1] - 1].pair};
  const int surv = allowed(leaf_mask(leaf->parse, pos[0])) ? 0 : 1;
  if (!allowed(leaf_mask(leaf->parse, pos[surv]))) throw std::logic_error("pivot does not separate the two solutions");

  // Filtered leaf copy.
  const std::uint32_t S = leaf->n_states;
  auto* begin = alloc<std::uint32_t>(S + 1);
  std::vector<std::uint32_t> kept;
  for (std::uint32_t q = 0; q < S; ++q) {
    begin[q] = static_cast<std::uint32_t>(kept.size());
    for (std::uint32_t i = leaf->list_begin[q]; i < leaf->list_begin[q + 1]; ++i)
      if (allowed(leaf_mask(leaf->parse, leaf->list[i]))) kept.push_back(leaf->list[i]);
  }
  begin[S] = static_cast<std::uint32_t>(kept.size());
  auto* list = alloc<std::uint32_t>(kept.size());
  std::copy(kept.begin(), kept.end(), list);
  auto* entries = alloc<Entry>(S);
  Preferred pref{ls.q[surv], {pos[surv], 0, 0}};
  eval_leaf(leaf->parse, S, begin, list, entries, &pref);
  auto* fresh = alloc<EvalNode>(1);
  *fresh = EvalNode{{nullptr, nullptr}, leaf->parse, S, entries, begin, list};
  ++copied_;

  for (size_t i = p.path.size() - 1; i-- > 0;) {
    const PathStep& st = p.path[i];
    const EvalNode* old = st.node;
    Choice pc = old->entries[st.q[surv]].choice[st.r[surv] - 1];
    (st.dir == 0 ? pc.r1 : pc.r2) = 1;
    Preferred pr{st.q[surv], pc};
    auto* n = alloc<EvalNode>(1);
    *n = *old;
    n->child[st.dir] = fresh;
    auto* es = alloc<Entry>(old->n_states);
    eval_inner(old->parse, n->child[0], n->child[1], es, &pr);
    n->entries = es;
    fresh = n;
    ++copied_;
  }

  auto* link = alloc<ConstraintLink>(1);
  *link = ConstraintLink{{p.feature, p.var, polarity}, v.constraints};
  return {fresh, link};
}

}  // namespace kbest
