#include <gtest/gtest.h>

#include <set>

#include "kbest/kbest.hpp"
#include "support.hpp"

using namespace kbest;

namespace {

WeightedGraph k3() {
  WeightedGraph g;
  g.n = 3;
  g.edges = {{1, 2}, {2, 3}, {1, 3}};
  g.edge_weight = {1, 1, 5};
  g.vertex_weight = {0, 0, 0};
  return g;
}

Solution edges(std::initializer_list<int> es) {
  Solution s;
  s.sets.resize(1);
  for (int e : es) s.sets[0].push_back(FeatureId::edge(e));
  return s;
}

}  // namespace

TEST(KBest, TrianglePaths) {
  Instance inst(k3(), Problem::SimplePath, {1, 3, false});
  KBestOptions opt;
  opt.want_solutions = true;
  auto res = k_best(inst, 10, opt);
  EXPECT_EQ(res.values, (std::vector<Weight>{2, 5}));
  ASSERT_EQ(res.solutions.size(), 2u);
  EXPECT_EQ(res.solutions[0], edges({1, 2}));
  EXPECT_EQ(res.solutions[1], edges({3}));
  EXPECT_TRUE(inst.stats().exhausted);
  EXPECT_EQ(inst.stats().produced, 2);
}

TEST(KBest, TriangleSpanningTrees) {
  Instance inst(k3(), Problem::SpanningTree, {});
  EXPECT_EQ(k_best(inst, 3).values, (std::vector<Weight>{2, 6, 6}));
  EXPECT_FALSE(inst.stats().exhausted);
}

TEST(KBest, InfeasibleMatching) {
  Instance inst(test::path_graph(3), Problem::PerfectMatching, {});
  auto res = k_best(inst, 5);
  EXPECT_TRUE(res.values.empty());
  EXPECT_TRUE(inst.stats().infeasible);
  EXPECT_TRUE(k_best_direct(inst, 4).empty());
}

TEST(KBest, SingleSolution) {
  Instance inst(test::path_graph(4), Problem::SimplePath, {1, 4, false});
  auto res = k_best(inst, 3);
  EXPECT_EQ(res.values, (std::vector<Weight>{3}));
  EXPECT_TRUE(inst.stats().exhausted);
  EXPECT_TRUE(res.copies.empty());
}

TEST(KBest, ArgumentErrors) {
  Instance inst(k3(), Problem::SimplePath, {1, 3, false});
  EXPECT_THROW(k_best(inst, 0), std::invalid_argument);
  EXPECT_THROW(k_best_direct(inst, 0), std::invalid_argument);
  EXPECT_THROW(k_best_direct(inst, 65), std::invalid_argument);
  EXPECT_THROW(Instance(k3(), Problem::SimplePath, {1, 4, false}), std::invalid_argument);
  EXPECT_THROW(Instance(k3(), Problem::SimplePath, {2, 2, false}), std::invalid_argument);
  TreeDecomposition bad;
  bad.n = 3;
  bad.bags = {{1, 2}, {2, 3}};
  bad.tree_edges = {{0, 1}};
  EXPECT_THROW(Instance(k3(), Problem::SpanningTree, {}, bad), std::invalid_argument);
}

TEST(KBest, RandomCorpusFullEnumeration) {
  for (Problem p : test::all_problems()) {
    for (const auto& c : test::corpus(p, 50, 51)) {
      auto all = test::oracle_solutions(p, c);
      Instance inst(c.g, p, c.params, c.td);
      KBestOptions opt;
      opt.want_solutions = true;
      auto res = k_best(inst, std::max<std::int64_t>(1, static_cast<std::int64_t>(all.size())), opt);
      ASSERT_EQ(res.values, test::values_of(all)) << problem_name(p) << '\n' << test::describe(c.g);
      auto pred = test::oracle_predicate(p, inst.graph(), c.params);
      std::set<Solution> distinct;
      for (size_t i = 0; i < res.solutions.size(); ++i) {
        EXPECT_TRUE(pred(res.solutions[i]));
        EXPECT_EQ(solution_value(res.solutions[i], inst.cost()), res.values[i]);
        distinct.insert(res.solutions[i]);
      }
      EXPECT_EQ(distinct.size(), res.solutions.size());
      // Best-first pops keys in nondecreasing order; each expansion copies a root-leaf path.
      EXPECT_TRUE(std::is_sorted(res.popped_keys.begin(), res.popped_keys.end()));
      for (auto copies : res.copies) EXPECT_LE(copies, inst.tree().depth() + 1);
    }
  }
}

TEST(KBest, PrefixesAndDirectEvaluation) {
  for (Problem p : test::all_problems()) {
    for (const auto& c : test::corpus(p, 30, 52)) {
      auto all = test::values_of(test::oracle_solutions(p, c));
      Instance inst(c.g, p, c.params, c.td);
      for (int k : {1, 2, 3, 7, 64}) {
        std::vector<Weight> want(all.begin(), all.begin() + std::min<size_t>(k, all.size()));
        EXPECT_EQ(k_best(inst, k).values, want);
        EXPECT_EQ(k_best_direct(inst, k), want);
      }
    }
  }
}

TEST(KBest, ExpansionOrdersAgree) {
  for (Problem p : test::all_problems()) {
    for (const auto& c : test::corpus(p, 30, 53)) {
      Instance inst(c.g, p, c.params, c.td);
      auto best = k_best(inst, 1000).values;
      for (auto order : {ExpansionOrder::DepthFirst, ExpansionOrder::Random}) {
        KBestOptions opt;
        opt.order = order;
        opt.seed = 99;
        EXPECT_EQ(k_best(inst, 1000, opt).values, best);
        EXPECT_EQ(k_best(inst, 5, opt).values, std::vector<Weight>(best.begin(), best.begin() + std::min<size_t>(5, best.size())));
      }
    }
  }
}

TEST(KBest, Deterministic) {
  for (const auto& c : test::corpus(Problem::SpanningTree, 20, 54)) {
    KBestOptions opt;
    opt.want_solutions = true;
    Instance a(c.g, Problem::SpanningTree, c.params, c.td);
    Instance b(c.g, Problem::SpanningTree, c.params, c.td);
    auto ra = k_best(a, 50, opt), rb = k_best(b, 50, opt);
    EXPECT_EQ(ra.values, rb.values);
    EXPECT_EQ(ra.solutions, rb.solutions);
    // Re-running on the same instance starts again from the untouched initial version.
    EXPECT_EQ(k_best(a, 50, opt).solutions, ra.solutions);
  }
}

TEST(KBest, TwoEdgeVariables) {
  test::Rng rng(55);
  for (int i = 0; i < 40; ++i) {
    test::GraphShape s;
    s.max_n = 6;
    s.max_m = 8;
    auto g = test::random_graph(rng, s);
    test::EdgePartitionAutomaton proto;
    CostModel cost = test::random_costs(rng, g, proto.var_types());
    auto all = oracle::enumerate_sorted(g, proto.var_types(), test::edge_partition_predicate(g), test::cost_table(cost, g));
    ASSERT_EQ(all.size(), size_t{1} << g.m());
    Instance inst(g, std::make_unique<test::EdgePartitionAutomaton>(), cost);
    KBestOptions opt;
    opt.want_solutions = true;
    auto res = k_best(inst, static_cast<std::int64_t>(all.size()), opt);
    EXPECT_EQ(res.values, test::values_of(all));
    std::set<Solution> distinct(res.solutions.begin(), res.solutions.end());
    EXPECT_EQ(distinct.size(), all.size());
  }
}

TEST(KBest, CostModelMustMatchAutomaton) {
  auto g = k3();
  EXPECT_THROW(Instance(g, std::make_unique<test::EdgePartitionAutomaton>(), CostModel::from_graph(g, FeatureKind::Edge)),
               std::invalid_argument);
}

TEST(KBest, LongLadderCopiesStayOnPaths) {
  auto g = test::ladder_graph(1 << 11);
  Instance inst(g, Problem::SimplePath, {1, g.n, false});
  auto res = k_best(inst, 300);
  ASSERT_EQ(res.values.size(), 300u);
  EXPECT_TRUE(std::is_sorted(res.values.begin(), res.values.end()));
  for (auto copies : res.copies) EXPECT_LE(copies, inst.tree().depth() + 1);
  EXPECT_LE(inst.stats().max_path, inst.tree().depth() + 1);
  // The first values agree with the direct top-k evaluation.
  auto direct = k_best_direct(inst, 64);
  EXPECT_EQ(direct, std::vector<Weight>(res.values.begin(), res.values.begin() + 64));
}
