#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "kbest/automaton.hpp"
#include "kbest/graph.hpp"

namespace kbest {

/// Optimum and second optimum of a solution multiset.
struct Top2Value {
  Weight best = kInf;
  Weight second = kInf;
  bool operator==(const Top2Value&) const = default;
};

inline Top2Value merge2(Top2Value a, Top2Value b) {
  Weight v[4] = {a.best, a.second, b.best, b.second};
  std::partial_sort(v, v + 2, v + 4);
  return {v[0], v[1]};
}

/// Smallest and second-smallest of the four pairwise sums.
inline Top2Value combine2(Top2Value a, Top2Value b) {
  return {add_ext(a.best, b.best), std::min(add_ext(a.best, b.second), add_ext(a.second, b.best))};
}

inline constexpr Top2Value kTop2MergeIdentity{kInf, kInf};
inline constexpr Top2Value kTop2CombineIdentity{0, kInf};

/// k smallest values, ascending, padded with infinity.
struct TopKValue {
  std::vector<Weight> v;
  bool operator==(const TopKValue&) const = default;
  int k() const { return static_cast<int>(v.size()); }
};

inline TopKValue topk_merge_identity(int k) { return {std::vector<Weight>(k, kInf)}; }
inline TopKValue topk_combine_identity(int k) {
  TopKValue t = topk_merge_identity(k);
  if (k > 0) t.v[0] = 0;
  return t;
}

inline TopKValue merge_k(const TopKValue& a, const TopKValue& b) {
  if (a.k() != b.k()) throw std::invalid_argument("top-k size mismatch");
  std::vector<Weight> all(a.v.size() + b.v.size());
  std::merge(a.v.begin(), a.v.end(), b.v.begin(), b.v.end(), all.begin());
  all.resize(a.v.size());
  return {std::move(all)};
}

inline TopKValue combine_k(const TopKValue& a, const TopKValue& b) {
  if (a.k() != b.k()) throw std::invalid_argument("top-k size mismatch");
  std::vector<Weight> sums;
  sums.reserve(a.v.size() * b.v.size());
  for (Weight x : a.v)
    for (Weight y : b.v) sums.push_back(add_ext(x, y));
  std::sort(sums.begin(), sums.end());
  sums.resize(a.v.size());
  return {std::move(sums)};
}

/// Evaluation structures usable with evaluate_root. Each provides the two
/// operations, their identities, and the value of an explicit leaf multiset.
struct MinPlus {
  using Value = Weight;
  Value merge_identity() const { return kInf; }
  Value combine_identity() const { return 0; }
  Value merge(Value a, Value b) const { return std::min(a, b); }
  Value combine(Value a, Value b) const { return add_ext(a, b); }
  Value of(std::vector<Weight> vals) const {
    Value m = kInf;
    for (Weight w : vals) m = std::min(m, w);
    return m;
  }
};

struct Top2 {
  using Value = Top2Value;
  Value merge_identity() const { return kTop2MergeIdentity; }
  Value combine_identity() const { return kTop2CombineIdentity; }
  Value merge(Value a, Value b) const { return merge2(a, b); }
  Value combine(Value a, Value b) const { return combine2(a, b); }
  Value of(std::vector<Weight> vals) const {
    std::sort(vals.begin(), vals.end());
    vals.resize(std::max<size_t>(vals.size(), 2), kInf);
    return {vals[0], vals[1]};
  }
};

struct TopK {
  using Value = TopKValue;
  int k = 1;
  Value merge_identity() const { return topk_merge_identity(k); }
  Value combine_identity() const { return topk_combine_identity(k); }
  Value merge(const Value& a, const Value& b) const { return merge_k(a, b); }
  Value combine(const Value& a, const Value& b) const { return combine_k(a, b); }
  Value of(std::vector<Weight> vals) const {
    std::sort(vals.begin(), vals.end());
    vals.resize(std::max<size_t>(vals.size(), k), kInf);
    vals.resize(k);
    return {std::move(vals)};
  }
};

/// Plain bottom-up evaluation over all relevant states, returning the value
/// at the accepting root state (merge identity if nothing is accepted).
template <class S>
typename S::Value evaluate_root(const ParseTree& t, const StateTable& st, const CostModel& c, const S& s) {
  if (st.root_state() < 0) return s.merge_identity();
  std::vector<std::vector<typename S::Value>> val(t.size());
  for (NodeId u = 0; u < t.size(); ++u) {
    const ParseNode& n = t.node(u);
    const int S_u = st.num_states(u);
    val[u].reserve(S_u);
    if (n.is_leaf()) {
      auto x = StateTable::leaf_feature(t, u);
      auto masks = st.leaf_masks(u);
      for (int q = 0; q < S_u; ++q) {
        std::vector<Weight> vals;
        for (auto i : st.leaf_state_solutions(u, q)) vals.push_back(mask_value(masks[i], x, c));
        val[u].push_back(s.of(std::move(vals)));
      }
      continue;
    }
    const auto& a = val[n.child[0]];
    const auto& b = val[n.child[1]];
    for (int q = 0; q < S_u; ++q) {
      typename S::Value acc = s.merge_identity();
      for (const FittingPair& p : st.pairs(u, q)) acc = s.merge(acc, s.combine(a[p.left], b[p.right]));
      val[u].push_back(std::move(acc));
    }
    std::vector<typename S::Value>().swap(val[n.child[0]]);
    std::vector<typename S::Value>().swap(val[n.child[1]]);
  }
  return val[t.root()][st.root_state()];
}

}  // namespace kbest
