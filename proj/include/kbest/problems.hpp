#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "kbest/automaton.hpp"

namespace kbest {

enum class Problem { SimplePath, SpanningTree, PerfectMatching, VertexCover };

std::optional<Problem> parse_problem(std::string_view name);
const char* problem_name(Problem p);
/// Kind of the single free variable of a built-in problem.
FeatureKind problem_var_kind(Problem p);

struct ProblemParams {
  int s = 0;  // simple-path endpoints
  int t = 0;
  bool directed = false;
};

/// Throws std::invalid_argument for s == t on simple-path.
std::unique_ptr<Automaton> builtin(Problem p, const ProblemParams& params = {});

/// Simple s-t paths as edge sets. States track, per source, its degree in the
/// partial solution and the other end of its open path fragment (another
/// source, or s / t once those are no longer sources), plus a "done" flag.
/// Directed mode keeps in/out degrees separately and requires Forward edges.
class SimplePathAutomaton : public Automaton {
 public:
  SimplePathAutomaton(int s, int t, bool directed);
  std::string name() const override { return "simple-path"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Edge}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override;
  std::optional<State> combine(const ParseTree& t, NodeId u, const State& left, const State& right) const override;
  State root_state() const override;
  std::string describe(const State& q) const override;

 private:
  int s_, t_;
  bool directed_;
};

/// Spanning trees as edge sets. States partition the sources into the
/// connected blocks of the partial forest; a flag records that a finished
/// component was closed off.
class SpanningTreeAutomaton : public Automaton {
 public:
  std::string name() const override { return "spanning-tree"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Edge}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override;
  std::optional<State> combine(const ParseTree& t, NodeId u, const State& left, const State& right) const override;
  State root_state() const override;
};

/// Perfect matchings as edge sets; one matched bit per source.
class PerfectMatchingAutomaton : public Automaton {
 public:
  std::string name() const override { return "perfect-matching"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Edge}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override;
  std::optional<State> combine(const ParseTree& t, NodeId u, const State& left, const State& right) const override;
  State root_state() const override { return {}; }
};

/// Vertex covers as vertex sets. Every copy of a vertex carries a membership
/// claim; copies must agree when fused and only the introducing copy puts the
/// vertex into the solution.
class VertexCoverAutomaton : public Automaton {
 public:
  std::string name() const override { return "vertex-cover"; }
  std::vector<FeatureKind> var_types() const override { return {FeatureKind::Vertex}; }
  std::vector<LeafState> leaf_states(const ParseTree& t, NodeId leaf) const override;
  std::optional<State> combine(const ParseTree& t, NodeId u, const State& left, const State& right) const override;
  State root_state() const override { return {}; }
};

}  // namespace kbest
