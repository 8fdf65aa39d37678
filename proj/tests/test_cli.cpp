#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "linf/maxflow.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run cli(const std::string& args) {
  const std::string cmd = std::string(LINF_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(LINF_TEST_DATA) + "/" + name; }

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "linf_cli_unit";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("routing solver names round trip") {
    using linf::RouteSolver;
    for (RouteSolver s : {RouteSolver::cd_l2, RouteSolver::cd_diagonal, RouteSolver::mirror_prox})
      CHECK(linf::parse_route_solver(linf::route_solver_name(s)) == s);
    CHECK_THROWS_AS(linf::parse_route_solver("gd"), std::invalid_argument);
  }

  TEST_CASE("help lists every flag with its default") {
    const Run r = cli("regress --help");
    CHECK(r.code == 0);
    for (const char* flag : {"--eps FLOAT [0.1]", "--seed UINT [1]", "--solver TEXT [cd-diag]", "--sparsity-s",
                             "--tau FLOAT [1e-06]", "--trace", "--format"})
      CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }

  TEST_CASE("regress summary and artifacts") {
    const std::string x = scratch("x.txt"), trace = scratch("trace.csv");
    const Run r = cli("regress " + data("identity2.linf") + " --out " + x + " --trace " + trace);
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("command regress\nsolver cd-diag\nrows 2\ncols 2\nepsilon 0.1\nseed 1\nvalue 0.0\n", 0) == 0);
    CHECK(slurp(x) == "0\n0\n");
    CHECK(slurp(trace).rfind("outer_iter,inner_iters,objective,elapsed_ns,seed\n", 0) == 0);
  }

  TEST_CASE("maxflow writes a flow file and a summary") {
    const std::string f = scratch("flow.txt");
    const Run r = cli("maxflow " + data("path2.dimacs") + " -o " + f);
    REQUIRE(r.code == 0);
    CHECK(r.out == "value 1\ncongestion 1\n");
    CHECK(slurp(f) == "e 1 2 1\ne 2 3 1\nvalue 1 congestion 1\n");
  }

  TEST_CASE("exact-flow accepts the largest 64-bit seed") {
    const Run r = cli("exact-flow " + data("path2_undirected.dimacs") + " --seed 18446744073709551615");
    CHECK(r.code == 0);
    CHECK(r.out.find("rounded_value 1\n") != std::string::npos);
  }

  TEST_CASE("bench table has one row per grid point") {
    const Run r = cli("bench " + data("identity2.linf") + " --grid 0.2 0.1");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epsilon,iterations,wall_ns,value");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.find(",0,") != std::string::npos);  // wall time is zero without --timing
    }
    CHECK(rows == 2);
  }

  TEST_CASE("exit status taxonomy") {
    const Run parse = cli("regress " + data("bad.linf"));
    CHECK(parse.code == 2);
    CHECK(parse.out.find("line 2, column 3") != std::string::npos);
    CHECK(cli("regress " + data("identity2.linf") + " --eps 0").code == 1);
    CHECK(cli("regress " + data("identity2.linf") + " --format dimacs").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("maxflow " + data("split.dimacs")).code == 4);
  }

  TEST_CASE("repeated runs are byte identical") {
    for (const char* solver : {"cd-l2", "mirror-prox"}) {
      const std::string args = std::string("regress ") + data("identity2.linf") + " --seed 99 --solver " + solver;
      CHECK(cli(args).out == cli(args).out);
    }
    const std::string flow = "exact-flow " + data("path2.dimacs") + " --seed 5";
    CHECK(cli(flow).out == cli(flow).out);
  }
}
