#include "kbest/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace kbest {

std::string weight_to_string(Weight w) { return is_inf(w) ? std::string("inf") : std::to_string(w); }

std::string FeatureId::str() const {
  return (kind == FeatureKind::Vertex ? "v" : "e") + std::to_string(index);
}

Weight WeightedGraph::weight(FeatureId f) const {
  if (!has_feature(f)) throw std::out_of_range("unknown feature " + f.str());
  return f.kind == FeatureKind::Edge ? edge_weight[f.index - 1] : vertex_weight[f.index - 1];
}

bool WeightedGraph::has_feature(FeatureId f) const {
  int limit = f.kind == FeatureKind::Edge ? m() : n;
  return f.index >= 1 && f.index <= limit;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
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

std::int64_t parse_int(std::string_view tok, int line, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace

WeightedGraph load_graph(std::istream& in) {
  WeightedGraph g;
  bool have_header = false;
  int declared_m = 0;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto tok = split_ws(raw);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "p") {
      if (have_header) throw ParseError(line_no, "duplicate header");
      if (tok.size() != 5 || tok[1] != "kbest") throw ParseError(line_no, "expected 'p kbest <n> <m> <0|1>'");
      auto n = parse_int(tok[2], line_no, "vertex count");
      auto m = parse_int(tok[3], line_no, "edge count");
      auto d = parse_int(tok[4], line_no, "directed flag");
      if (n < 1 || n > 100'000'000) throw ParseError(line_no, "vertex count out of range");
      if (m < 0 || m > 100'000'000) throw ParseError(line_no, "edge count out of range");
      if (d != 0 && d != 1) throw ParseError(line_no, "directed flag must be 0 or 1");
      g.n = static_cast<int>(n);
      g.directed = d == 1;
      declared_m = static_cast<int>(m);
      g.edges.reserve(declared_m);
      g.edge_weight.reserve(declared_m);
      g.vertex_weight.assign(g.n, 0);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(line_no, "content before header");
    if (tok[0] == "e") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'e <tail> <head> <weight>'");
      auto t = parse_int(tok[1], line_no, "tail");
      auto h = parse_int(tok[2], line_no, "head");
      auto w = parse_int(tok[3], line_no, "weight");
      if (t < 1 || t > g.n || h < 1 || h > g.n) throw ParseError(line_no, "endpoint out of range");
      if (g.m() >= declared_m) throw ParseError(line_no, "more edges than declared");
      if (w == kInf) throw ParseError(line_no, "weight out of range");
      g.edges.push_back({static_cast<int>(t), static_cast<int>(h)});
      g.edge_weight.push_back(w);
    } else if (tok[0] == "v") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'v <vertex> <weight>'");
      auto v = parse_int(tok[1], line_no, "vertex");
      auto w = parse_int(tok[2], line_no, "weight");
      if (v < 1 || v > g.n) throw ParseError(line_no, "vertex out of range");
      if (w == kInf) throw ParseError(line_no, "weight out of range");
      g.vertex_weight[v - 1] = w;
    } else {
      throw ParseError(line_no, "unknown line type '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_header) throw ParseError(line_no, "missing header");
  if (g.m() != declared_m)
    throw ParseError(line_no, "expected " + std::to_string(declared_m) + " edges, found " +
                                  std::to_string(g.m()));
  return g;
}

WeightedGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_graph(in);
}

std::string save_graph(const WeightedGraph& g) {
  std::ostringstream out;
  out << "p kbest " << g.n << ' ' << g.m() << ' ' << (g.directed ? 1 : 0) << '\n';
  for (int v = 1; v <= g.n; ++v)
    if (g.vertex_weight[v - 1] != 0) out << "v " << v << ' ' << g.vertex_weight[v - 1] << '\n';
  for (int e = 0; e < g.m(); ++e)
    out << "e " << g.edges[e].tail << ' ' << g.edges[e].head << ' ' << g.edge_weight[e] << '\n';
  return out.str();
}

WeightedGraph undirected_shadow(const WeightedGraph& g) {
  WeightedGraph u = g;
  u.directed = false;
  return u;
}

bool Solution::contains(int var, FeatureId f) const {
  const auto& s = sets.at(var);
  return std::binary_search(s.begin(), s.end(), f);
}

void Solution::canonicalize() {
  for (auto& s : sets) std::sort(s.begin(), s.end());
}

std::string Solution::encode() const {
  std::string out;
  for (size_t i = 0; i < sets.size(); ++i) {
    if (i) out += '|';
    for (size_t j = 0; j < sets[i].size(); ++j) {
      if (j) out += ',';
      out += sets[i][j].str();
    }
  }
  return out;
}

CostModel::CostModel(std::vector<FeatureKind> var_types, const WeightedGraph& g)
    : var_types_(std::move(var_types)) {
  for (auto kind : var_types_) {
    if (kind == FeatureKind::Edge)
      costs_.push_back(g.edge_weight);
    else
      costs_.push_back(g.vertex_weight);
  }
}

CostModel CostModel::from_graph(const WeightedGraph& g, FeatureKind kind) { return CostModel({kind}, g); }

Weight CostModel::cost(int var, FeatureId f) const {
  if (var < 0 || var >= n_free()) throw std::out_of_range("variable index out of range");
  if (f.kind != var_types_[var])
    throw std::invalid_argument("feature " + f.str() + " does not match the type of variable " +
                                std::to_string(var + 1));
  const auto& c = costs_[var];
  if (f.index < 1 || f.index > static_cast<int>(c.size())) throw std::out_of_range("unknown feature " + f.str());
  return c[f.index - 1];
}

void CostModel::set_cost(int var, FeatureId f, Weight w) {
  cost(var, f);  // validates
  costs_[var][f.index - 1] = w;
}

Weight solution_value(const Solution& s, const CostModel& c) {
  if (static_cast<int>(s.sets.size()) != c.n_free())
    throw std::invalid_argument("solution has wrong number of variables");
  Weight total = 0;
  for (int var = 0; var < c.n_free(); ++var)
    for (FeatureId f : s.sets[var]) total = add_ext(total, c.cost(var, f));
  return total;
}

}  // namespace kbest
