#include "kbest/kbest.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include "kbest/structures.hpp"

namespace kbest {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Instance::Instance(const WeightedGraph& g, Problem p, const ProblemParams& params,
                   const std::optional<TreeDecomposition>& td)
    : g_(p == Problem::SimplePath ? g : undirected_shadow(g)) {
  ProblemParams pp = params;
  pp.directed = g_.directed;
  if (p == Problem::SimplePath) {
    if (pp.s < 1 || pp.s > g.n || pp.t < 1 || pp.t > g.n) throw std::invalid_argument("path endpoint out of range");
  }
  a_ = builtin(p, pp);
  cost_ = CostModel::from_graph(g_, problem_var_kind(p));
  init(td);
}

Instance::Instance(const WeightedGraph& g, std::unique_ptr<Automaton> a, CostModel cost,
                   const std::optional<TreeDecomposition>& td)
    : g_(g), a_(std::move(a)), cost_(std::move(cost)) {
  if (cost_.var_types() != a_->var_types()) throw std::invalid_argument("cost model does not match the automaton");
  init(td);
}

void Instance::init(const std::optional<TreeDecomposition>& td) {
  auto t0 = std::chrono::steady_clock::now();
  WeightedGraph shadow = undirected_shadow(g_);
  TreeDecomposition dec;
  if (td) {
    auto report = validate(*td, shadow);
    if (!report.valid()) throw std::invalid_argument("invalid tree decomposition: " + report.violations[0].message);
    dec = *td;
  } else {
    dec = heuristic_decomposition(shadow);
  }
  stats_.td_width = dec.width();
  sd_ = balance(dec, shadow);
  stats_.width = sd_.width;
  stats_.sd_depth = sd_.depth;
  stats_.t_decompose = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  tree_ = build_parse_tree(sd_, g_);
  stats_.parse_depth = tree_.depth();
  stats_.parse_nodes = tree_.size();
  stats_.max_order = tree_.max_order();
  stats_.t_parse = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  table_ = StateTable::build(tree_, *a_);
  stats_.max_states = table_.max_states();
  stats_.total_states = table_.total_states();
  stats_.total_pairs = table_.total_pairs();
  stats_.t_states = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  engine_ = std::make_unique<EvaluationEngine>(tree_, table_, cost_);
  stats_.t_evaluate = seconds_since(t0);
}

KBestResult k_best(Instance& inst, std::int64_t k, const KBestOptions& opt) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  auto t0 = std::chrono::steady_clock::now();
  EvaluationEngine& eng = inst.engine();
  RunStats& stats = inst.stats();
  KBestResult res;
  stats.expansions = 0;
  stats.exhausted = stats.infeasible = false;

  const Version root = eng.initial();
  const Top2Value bp = eng.best_pair(root);
  if (bp.best == kInf) {
    stats.infeasible = true;
    stats.produced = 0;
    return res;
  }
  auto emit = [&](const Version& v, int rank) {
    res.values.push_back(rank == 1 ? eng.best_pair(v).best : eng.best_pair(v).second);
    if (opt.want_solutions) res.solutions.push_back(eng.reconstruct(v, rank));
  };
  const bool best_first = opt.order == ExpansionOrder::BestFirst;
  emit(root, 1);

  struct Item {
    Weight key;
    std::uint64_t seq;
    Version v;
  };
  auto later = [](const Item& a, const Item& b) { return a.key != b.key ? a.key > b.key : a.seq > b.seq; };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
  std::vector<Item> pool;  // depth-first / random frontier
  std::mt19937_64 rng(opt.seed);
  std::uint64_t seq = 0;

  auto push = [&](const Version& v) {
    Weight key = eng.best_pair(v).second;
    if (key == kInf) return;
    if (best_first)
      heap.push({key, seq++, v});
    else
      pool.push_back({key, seq++, v});
  };
  auto pop = [&]() {
    if (best_first) {
      Item it = heap.top();
      heap.pop();
      return it;
    }
    size_t idx = pool.size() - 1;
    if (opt.order == ExpansionOrder::Random) idx = std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng);
    std::swap(pool[idx], pool.back());
    Item it = pool.back();
    pool.pop_back();
    return it;
  };
  auto empty = [&]() { return best_first ? heap.empty() : pool.empty(); };

  push(root);
  while (!empty() && (!best_first || static_cast<std::int64_t>(res.values.size()) < k)) {
    Item it = pop();
    res.popped_keys.push_back(it.key);
    emit(it.v, 2);
    if (best_first && static_cast<std::int64_t>(res.values.size()) >= k) break;
    const std::uint64_t before = eng.nodes_copied();
    PivotReport rep = eng.pivot_query(it.v);
    Version forced = eng.constrain(it.v, rep, Polarity::Forced);
    Version excluded = eng.constrain(it.v, rep, Polarity::Excluded);
    ++stats.expansions;
    res.copies.push_back(static_cast<std::int64_t>((eng.nodes_copied() - before) / 2));
    stats.max_path = std::max<std::int64_t>(stats.max_path, static_cast<std::int64_t>(rep.path.size()));
    if (opt.on_version) {
      opt.on_version(forced, it.v);
      opt.on_version(excluded, it.v);
    }
    push(forced);
    push(excluded);
  }
  stats.exhausted = empty() && static_cast<std::int64_t>(res.values.size()) < k;

  if (!best_first) {
    std::vector<size_t> idx(res.values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      if (res.values[a] != res.values[b]) return res.values[a] < res.values[b];
      return opt.want_solutions && res.solutions[a] < res.solutions[b];
    });
    if (static_cast<std::int64_t>(idx.size()) > k) idx.resize(static_cast<size_t>(k));
    KBestResult sorted;
    for (size_t i : idx) {
      sorted.values.push_back(res.values[i]);
      if (opt.want_solutions) sorted.solutions.push_back(res.solutions[i]);
    }
    sorted.popped_keys = std::move(res.popped_keys);
    sorted.copies = std::move(res.copies);
    res = std::move(sorted);
  }

  stats.produced = static_cast<std::int64_t>(res.values.size());
  if (!res.copies.empty()) {
    auto [mn, mx] = std::minmax_element(res.copies.begin(), res.copies.end());
    stats.copies_min = *mn;
    stats.copies_max = *mx;
    stats.copies_mean = static_cast<double>(std::accumulate(res.copies.begin(), res.copies.end(), std::int64_t{0})) /
                        static_cast<double>(res.copies.size());
  }
  stats.t_enumerate = seconds_since(t0);
  return res;
}

std::vector<Weight> k_best_direct(const Instance& inst, int k_fixed) {
  if (k_fixed < 1 || k_fixed > 64) throw std::invalid_argument("direct k must be in [1, 64]");
  TopKValue v = evaluate_root(inst.tree(), inst.table(), inst.cost(), TopK{k_fixed});
  std::vector<Weight> out;
  for (Weight w : v.v)
    if (w != kInf) out.push_back(w);
  return out;
}

}  // namespace kbest
