#include "kbest/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>

#include "kbest/kbest.hpp"
#include "kbest/oracle.hpp"

namespace kbest {

namespace {

struct EnumOptions {
  std::string graph, td, problem = "simple-path", dump;
  int source = 0, target = 0;
  std::int64_t k = 0;
  int direct_k = 0;
  int directed_override = -1;
  bool solutions = false, oracle_check = false, stats = false;
};

std::string json_line(Weight value, const Solution* s) {
  nlohmann::ordered_json j;
  j["value"] = value;
  auto sets = nlohmann::ordered_json::array();
  if (s)
    for (const auto& set : s->sets) {
      auto arr = nlohmann::ordered_json::array();
      for (FeatureId f : set) arr.push_back(f.str());
      sets.push_back(arr);
    }
  j["sets"] = sets;
  return j.dump();
}

void print_stats(std::ostream& err, const RunStats& st, bool ran_enumeration) {
  err << "stats: td_width=" << st.td_width << " width=" << st.width << " sd_depth=" << st.sd_depth
      << " parse_depth=" << st.parse_depth << " parse_nodes=" << st.parse_nodes << " max_order=" << st.max_order
      << " max_states=" << st.max_states << " states=" << st.total_states << " pairs=" << st.total_pairs << '\n';
  if (ran_enumeration)
    err << "stats: produced=" << st.produced << " expansions=" << st.expansions << " copies_min=" << st.copies_min
        << " copies_mean=" << std::fixed << std::setprecision(2) << st.copies_mean << " copies_max=" << st.copies_max
        << " max_path=" << st.max_path << '\n';
  err << std::fixed << std::setprecision(3) << "stats: time decompose=" << st.t_decompose << "s parse=" << st.t_parse
      << "s states=" << st.t_states << "s evaluate=" << st.t_evaluate << "s enumerate=" << st.t_enumerate << "s\n";
  if (st.infeasible) err << "stats: infeasible\n";
  if (st.exhausted) err << "stats: exhausted after " << st.produced << '\n';
}

int run_enumeration(const EnumOptions& o, bool ksp, std::ostream& out, std::ostream& err) {
  auto problem = ksp ? std::optional<Problem>(Problem::SimplePath) : parse_problem(o.problem);
  if (!problem) {
    err << "error: unknown problem '" << o.problem << "'\n";
    return kExitParams;
  }
  if (o.direct_k == 0 && o.k < 1) {
    err << "error: -k must be at least 1\n";
    return kExitParams;
  }
  if (o.direct_k != 0 && (o.direct_k < 1 || o.direct_k > 64)) {
    err << "error: --direct-k must be in [1, 64]\n";
    return kExitParams;
  }
  WeightedGraph g;
  std::optional<TreeDecomposition> td;
  try {
    g = load_graph_file(o.graph);
    if (!o.td.empty()) td = load_td_file(o.td);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  if (o.directed_override == 0 || o.directed_override == 1) g.directed = o.directed_override == 1;
  ProblemParams params{o.source, o.target, g.directed};
  if (*problem == Problem::SimplePath) {
    if (o.source < 1 || o.source > g.n || o.target < 1 || o.target > g.n) {
      err << "error: source and target must be vertices of the graph\n";
      return kExitParams;
    }
    if (o.source == o.target) {
      err << "error: source and target must differ\n";
      return kExitParams;
    }
  }
  if (td && td->n != g.n) {
    err << "error: decomposition is for " << td->n << " vertices, graph has " << g.n << '\n';
    return kExitIo;
  }

  std::unique_ptr<Instance> inst;
  try {
    inst = std::make_unique<Instance>(g, *problem, params, td);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  if (!o.dump.empty()) {
    std::ofstream f(o.dump);
    if (!f) {
      err << "error: cannot write " << o.dump << '\n';
      return kExitIo;
    }
    inst->tree().dump(f);
  }

  std::vector<Weight> values;
  std::vector<Solution> sols;
  try {
    if (o.direct_k) {
      values = k_best_direct(*inst, o.direct_k);
      for (Weight v : values) out << v << '\n';
      if (values.empty()) inst->stats().infeasible = true;
    } else {
      KBestOptions ko;
      ko.want_solutions = o.solutions || o.oracle_check;
      auto res = k_best(*inst, o.k, ko);
      values = res.values;
      sols = res.solutions;
      for (size_t i = 0; i < values.size(); ++i) {
        if (o.solutions)
          out << json_line(values[i], &sols[i]) << '\n';
        else
          out << values[i] << '\n';
      }
    }
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParams;
  }
  out.flush();
  if (o.stats) print_stats(err, inst->stats(), o.direct_k == 0);

  if (o.oracle_check) {
    const WeightedGraph& eg = inst->graph();
    std::vector<oracle::Ranked> ref;
    try {
      if (*problem == Problem::SimplePath)
        ref = oracle::enumerate_paths(eg, o.source, o.target, 1'000'000);
      else
        ref = oracle::solve(*problem, eg, params);
    } catch (const std::length_error& e) {
      err << "oracle-check: skipped (" << e.what() << ")\n";
      return kExitOk;
    }
    const std::int64_t want = o.direct_k ? o.direct_k : o.k;
    const size_t n = static_cast<size_t>(std::min<std::int64_t>(want, static_cast<std::int64_t>(ref.size())));
    bool ok = values.size() == n;
    for (size_t i = 0; ok && i < n; ++i) ok = values[i] == ref[i].value;
    if (ok && !sols.empty()) {
      oracle::Predicate pred;
      switch (*problem) {
        case Problem::SimplePath: pred = oracle::simple_path(eg, o.source, o.target); break;
        case Problem::SpanningTree: pred = oracle::spanning_tree(eg); break;
        case Problem::PerfectMatching: pred = oracle::perfect_matching(eg); break;
        case Problem::VertexCover: pred = oracle::vertex_cover(eg); break;
      }
      auto sorted = sols;
      std::sort(sorted.begin(), sorted.end());
      ok = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
      for (size_t i = 0; ok && i < sols.size(); ++i)
        ok = pred(sols[i]) && solution_value(sols[i], inst->cost()) == values[i];
    }
    if (!ok) {
      err << "oracle-check: MISMATCH (engine " << values.size() << " values, oracle " << ref.size() << ")\n";
      return kExitOracleDiff;
    }
    err << "oracle-check: ok (" << n << " values)\n";
  }
  return kExitOk;
}

int run_balance(const std::string& graph, const std::string& td_path, const std::string& out_path, std::ostream& out,
                std::ostream& err) {
  WeightedGraph g;
  TreeDecomposition td;
  try {
    g = load_graph_file(graph);
    td = load_td_file(td_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  WeightedGraph shadow = undirected_shadow(g);
  auto report = validate(td, shadow);
  if (!report.valid()) {
    for (const auto& v : report.violations) err << "invalid: " << v.message << '\n';
    return kExitInvalidTd;
  }
  ShallowDecomposition sd = balance(td, shadow);
  std::string text = save_td(sd.as_tree_decomposition());
  std::string summary = "width=" + std::to_string(sd.width) + " depth=" + std::to_string(sd.depth) + "\n";
  if (out_path.empty()) {
    out << text;
    err << summary;
    return kExitOk;
  }
  std::ofstream f(out_path);
  if (!f || !(f << text)) {
    err << "error: cannot write " << out_path << '\n';
    return kExitIo;
  }
  out << summary;
  return kExitOk;
}

int run_validate(const std::string& graph, const std::string& td_path, std::ostream& out, std::ostream& err) {
  WeightedGraph g;
  TreeDecomposition td;
  try {
    g = load_graph_file(graph);
    td = load_td_file(td_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  auto report = validate(td, undirected_shadow(g));
  if (report.valid()) {
    out << "valid width=" << report.width << '\n';
    return kExitOk;
  }
  for (const auto& v : report.violations) out << "invalid: " << v.message << '\n';
  return kExitInvalidTd;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-best enumeration on bounded-treewidth graphs"};
  app.require_subcommand(1);

  EnumOptions ko, so;
  auto add_common = [](CLI::App* c, EnumOptions& o) {
    c->add_option("--graph", o.graph, "graph file (.gr)")->required();
    c->add_option("-k", o.k, "number of solutions");
    c->add_option("--td", o.td, "tree decomposition (.td); default: min-fill heuristic");
    c->add_flag("--solutions", o.solutions, "print solutions as JSON lines");
    c->add_flag("--oracle-check", o.oracle_check, "compare with brute force (exit 3 on mismatch)");
    c->add_flag("--stats", o.stats, "print statistics to stderr");
    c->add_option("--directed-override", o.directed_override, "treat the graph as undirected (0) or directed (1)")
        ->check(CLI::IsMember({0, 1}));
    c->add_option("--dump-parse-tree", o.dump, "write the parse tree to a file");
  };
  auto* ksp = app.add_subcommand("ksp", "k shortest simple s-t paths");
  add_common(ksp, ko);
  ksp->add_option("--source,-s", ko.source, "source vertex")->required();
  ksp->add_option("--target,-t", ko.target, "target vertex")->required();

  auto* solve = app.add_subcommand("solve", "k best solutions of a built-in problem");
  add_common(solve, so);
  solve->add_option("--problem", so.problem, "simple-path | spanning-tree | perfect-matching | vertex-cover")
      ->required();
  solve->add_option("--source,-s", so.source, "source vertex (simple-path)");
  solve->add_option("--target,-t", so.target, "target vertex (simple-path)");
  solve->add_option("--direct-k", so.direct_k, "values from the top-k structure instead (1..64)");

  std::string b_graph, b_td, b_out;
  auto* bal = app.add_subcommand("balance", "binary decomposition of logarithmic depth");
  bal->add_option("--graph", b_graph)->required();
  bal->add_option("--td", b_td)->required();
  bal->add_option("-o", b_out, "output .td (default: stdout)");

  std::string v_graph, v_td;
  auto* val = app.add_subcommand("validate", "check a tree decomposition");
  val->add_option("--graph", v_graph)->required();
  val->add_option("--td", v_td)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParams;
  }

  if (ksp->parsed()) return run_enumeration(ko, true, out, err);
  if (solve->parsed()) return run_enumeration(so, false, out, err);
  if (bal->parsed()) return run_balance(b_graph, b_td, b_out, out, err);
  return run_validate(v_graph, v_td, out, err);
}

}  // namespace kbest
