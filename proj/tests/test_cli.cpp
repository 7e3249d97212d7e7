#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "kbest/cli.hpp"
#include "kbest/treedec.hpp"
#include "support.hpp"

using namespace kbest;
namespace fs = std::filesystem;

namespace {

const std::string kData = KBEST_TEST_DATA;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return kData + "/" + name; }

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("kbest_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    auto p = (path_ / name).string();
    std::ofstream(p) << content;
    return p;
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, KspTriangle) {
  auto r = run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "3", "-k", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2\n5\n");
}

TEST(Cli, KspExhaustedStats) {
  auto r = run({"ksp", "--graph", data("k3.gr"), "--source", "1", "--target", "3", "-k", "10", "--stats"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2\n5\n");
  EXPECT_NE(r.err.find("exhausted after 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("parse_depth="), std::string::npos);
  EXPECT_NE(r.err.find("copies_max="), std::string::npos);
}

TEST(Cli, KspSolutionsAsJsonLines) {
  auto r = run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "3", "-k", "2", "--solutions"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "{\"value\":2,\"sets\":[[\"e1\",\"e2\"]]}\n{\"value\":5,\"sets\":[[\"e3\"]]}\n");
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j["value"].is_number_integer());
  }
}

TEST(Cli, PathFixtures) {
  EXPECT_EQ(run({"ksp", "--graph", data("p3.gr"), "-s", "1", "-t", "3", "-k", "5"}).out, "2\n");
  auto r = run({"ksp", "--graph", data("two_cycle.gr"), "-s", "1", "-t", "2", "-k", "5"});
  EXPECT_EQ(r.out, "4\n");
  auto u = run({"ksp", "--graph", data("two_cycle.gr"), "-s", "1", "-t", "2", "-k", "5", "--directed-override", "0"});
  EXPECT_EQ(u.out, "1\n4\n");
}

TEST(Cli, SolveProblems) {
  auto st = run({"solve", "--problem", "spanning-tree", "--graph", data("k3.gr"), "-k", "3"});
  EXPECT_EQ(st.code, 0);
  EXPECT_EQ(st.out, "2\n6\n6\n");
  auto pm = run({"solve", "--problem", "perfect-matching", "--graph", data("p3.gr"), "-k", "3", "--stats"});
  EXPECT_EQ(pm.code, 0);
  EXPECT_EQ(pm.out, "");
  EXPECT_NE(pm.err.find("infeasible"), std::string::npos);
  auto vc = run({"solve", "--problem", "vertex-cover", "--graph", data("k3.gr"), "-k", "4", "--oracle-check"});
  EXPECT_EQ(vc.code, 0);
  EXPECT_EQ(vc.out, "0\n0\n0\n0\n");
  EXPECT_NE(vc.err.find("oracle-check: ok"), std::string::npos);
}

TEST(Cli, DirectKMatchesDefaultPipeline) {
  auto direct = run({"solve", "--problem", "spanning-tree", "--graph", data("k3.gr"), "--direct-k", "2"});
  auto full = run({"solve", "--problem", "spanning-tree", "--graph", data("k3.gr"), "-k", "2"});
  EXPECT_EQ(direct.code, 0);
  EXPECT_EQ(direct.out, full.out);
  EXPECT_EQ(run({"solve", "--problem", "spanning-tree", "--graph", data("k3.gr"), "--direct-k", "65"}).code, 2);
}

TEST(Cli, OracleCheckOnRandomGraphs) {
  TempDir dir;
  for (Problem p : test::all_problems()) {
    int i = 0;
    for (const auto& c : test::corpus(p, 8, 71)) {
      auto g = dir.file("g" + std::to_string(i) + ".gr", save_graph(c.g));
      auto td = dir.file("g" + std::to_string(i++) + ".td", save_td(c.td));
      std::vector<std::string> args{"solve", "--problem", problem_name(p), "--graph", g, "--td", td, "-k", "40",
                                    "--oracle-check", "--solutions"};
      if (p == Problem::SimplePath) {
        args.insert(args.end(), {"-s", std::to_string(c.params.s), "-t", std::to_string(c.params.t)});
      }
      auto r = run(args);
      EXPECT_EQ(r.code, 0) << r.err;
      EXPECT_NE(r.err.find("oracle-check: ok"), std::string::npos) << r.err;
    }
  }
}

TEST(Cli, ParameterErrors) {
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "1", "-k", "2"}).code, 2);
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "9", "-k", "2"}).code, 2);
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "3", "-k", "0"}).code, 2);
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-k", "2"}).code, 2);
  EXPECT_EQ(run({"solve", "--problem", "coloring", "--graph", data("k3.gr"), "-k", "2"}).code, 2);
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "3", "-k", "2", "--directed-override", "5"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, IoErrors) {
  TempDir dir;
  EXPECT_EQ(run({"ksp", "--graph", data("missing.gr"), "-s", "1", "-t", "3", "-k", "2"}).code, 1);
  auto bad = dir.file("bad.gr", "p kbest 3 1 0\ne 1 2 oops\n");
  auto r = run({"ksp", "--graph", bad, "-s", "1", "-t", "3", "-k", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_EQ(run({"ksp", "--graph", data("k3.gr"), "--td", data("k3_broken.td"), "-s", "1", "-t", "3", "-k", "2"}).code,
            1);
}

TEST(Cli, UsesGivenDecomposition) {
  auto r = run({"ksp", "--graph", data("k3.gr"), "--td", data("k3.td"), "-s", "1", "-t", "3", "-k", "2", "--stats"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2\n5\n");
  EXPECT_NE(r.err.find("td_width=2"), std::string::npos);
}

TEST(Cli, DumpParseTree) {
  TempDir dir;
  auto path = dir.path("tree.txt");
  auto r = run({"ksp", "--graph", data("k3.gr"), "-s", "1", "-t", "3", "-k", "1", "--dump-parse-tree", path});
  EXPECT_EQ(r.code, 0);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_NE(text.str().find("introduces e1"), std::string::npos);
}

TEST(Cli, ValidateCommand) {
  auto ok = run({"validate", "--graph", data("k3.gr"), "--td", data("k3.td")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "valid width=2\n");
  auto bad = run({"validate", "--graph", data("k3.gr"), "--td", data("k3_broken.td")});
  EXPECT_EQ(bad.code, 4);
  EXPECT_NE(bad.out.find("edge 3 (1,3) is not covered"), std::string::npos) << bad.out;
  EXPECT_EQ(run({"validate", "--graph", data("k3.gr"), "--td", data("nope.td")}).code, 1);
}

TEST(Cli, BalanceCommand) {
  TempDir dir;
  auto g = test::path_graph(1024);
  TreeDecomposition chain;
  chain.n = 1024;
  for (int v = 1; v < 1024; ++v) {
    chain.bags.push_back({v, v + 1});
    if (v > 1) chain.tree_edges.emplace_back(v - 2, v - 1);
  }
  auto gp = dir.file("p1024.gr", save_graph(g));
  auto tp = dir.file("p1024.td", save_td(chain));
  auto outp = dir.path("balanced.td");
  auto r = run({"balance", "--graph", gp, "--td", tp, "-o", outp});
  ASSERT_EQ(r.code, 0) << r.err;
  int width = -1, depth = -1;
  ASSERT_EQ(std::sscanf(r.out.c_str(), "width=%d depth=%d", &width, &depth), 2) << r.out;
  EXPECT_LE(depth, kDefaultDepthConstant * 10);
  EXPECT_LE(width, 5);
  auto v = run({"validate", "--graph", gp, "--td", outp});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, "valid width=" + std::to_string(width) + "\n");

  auto to_stdout = run({"balance", "--graph", gp, "--td", tp});
  EXPECT_EQ(to_stdout.code, 0);
  EXPECT_EQ(to_stdout.out.rfind("s td ", 0), 0u);
  EXPECT_EQ(to_stdout.err, r.out);
  EXPECT_EQ(run({"balance", "--graph", data("k3.gr"), "--td", data("k3_broken.td")}).code, 4);
}
