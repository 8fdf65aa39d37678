// Command-line front end: regression, flows, epsilon sweeps and oracle checks.
//
// Exit status: 0 ok, 1 bad arguments, 2 unreadable or malformed input,
// 3 solver fault or failed verification, 4 infeasible demands.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "linf/baselines.hpp"
#include "linf/cd_solver.hpp"
#include "linf/errors.hpp"
#include "linf/instance.hpp"
#include "linf/maxflow.hpp"
#include "linf/mirror_prox.hpp"
#include "oracles.hpp"

namespace {

using namespace linf;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VerifyFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::string command;
  std::string input;
  std::string solver;
  std::string format;
  double eps = 0.1;
  double sparsity = 0.0;
  double tau = 1e-6;
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;
  std::vector<double> grid{0.1, 0.05, 0.025};
  bool timing = false;
  bool eps_set = false;  // exact-flow derives eps from the graph otherwise
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Like num() but keeps a decimal point on integral values.
std::string real(double v) {
  std::string s = num(v);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void summary(const std::string& key, const std::string& value) { std::cout << key << ' ' << value << '\n'; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

// First meaningful token decides the format unless --format is given.
std::string detect_format(const RunSpec& spec, const std::string& text) {
  if (!spec.format.empty()) return spec.format;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    if (line.compare(p, 11, "linf-matrix") == 0) return "linf-matrix";
    return "dimacs";
  }
  return "dimacs";
}

MatrixFile load_matrix(const RunSpec& spec) {
  const std::string text = read_file(spec.input);
  if (detect_format(spec, text) != "linf-matrix") throw Usage(spec.command + " expects a linf-matrix input");
  std::istringstream in(text);
  return read_matrix(in);
}

FlowNetwork load_network(const RunSpec& spec) {
  const std::string text = read_file(spec.input);
  if (detect_format(spec, text) != "dimacs") throw Usage(spec.command + " expects a DIMACS input");
  std::istringstream in(text);
  return read_dimacs(in);
}

RegressionInstance make_instance(const MatrixFile& mf, const RunSpec& spec, double eps) {
  RegressionInstance inst;
  inst.matrix = mf.matrix;
  inst.rhs = mf.rhs;
  inst.epsilon = eps;
  inst.sparsity = spec.sparsity;
  return inst;
}

struct RegressOutcome {
  std::vector<double> x;
  double value = 0.0;
  double lower_bound = -INFINITY;
  long iterations = 0;  // sampled coordinates (or coordinate evaluations for the baselines)
  std::string trace;
};

// Steps for the baselines so their theory bound reaches eps.
long baseline_budget(double total_smoothness, double eps, long cap) {
  return std::clamp(static_cast<long>(std::ceil(4.0 * total_smoothness / eps)), 1L, cap);
}

RegressOutcome run_regress(const RegressionInstance& inst, const RunSpec& spec, Rng& rng) {
  RegressOutcome out;
  const std::string& s = spec.solver;
  if (s == "cd-l2" || s == "cd-diag") {
    BoxSolveOptions bo;
    bo.timing = spec.timing;
    const UnitBoxReduction red = reduce_to_unit_box(inst, std::vector<double>(inst.matrix.cols(), 0.0));
    BoxSolveResult r = solve_box_linf(red.unit, s == "cd-l2" ? RegMode::l2 : RegMode::diagonal, rng, bo);
    out.x = red.to_original(r.x);
    out.value = residual_inf(inst.matrix, out.x, inst.rhs);
    out.lower_bound = r.lower_bound;
    out.iterations = r.inner_iters;
    out.trace = transcript_csv(r.transcript);
  } else if (s == "mirror-prox") {
    MirrorProxOptions mo;
    mo.tau = spec.tau;
    mo.trace = !spec.trace.empty();
    FlowRegressResult r = solve_flow_regress(inst, rng, mo);
    out.x = r.x;
    out.value = r.value;
    out.lower_bound = r.lower_bound;
    out.iterations = r.iterations;
    out.trace = mirror_prox_csv(r.transcript);
    if (r.sparsity_warning) std::cerr << "warning: |x|^2 exceeds twice the sparsity estimate\n";
  } else if (s == "gd" || s == "plain-cd") {
    // Both baselines minimize smax over the sign-doubled rows with alpha = eps / (2 log 2n).
    const SignDoubled d = sign_double(inst.matrix, inst.rhs);
    const double alpha = inst.epsilon / (2.0 * std::log(std::max(2, d.matrix.rows())));
    const SmaxObjective f(d.matrix, d.rhs, alpha);
    const ObjectiveHandle h = make_handle(f);
    const std::vector<double> x0(inst.matrix.cols(), 0.0);
    BaselineResult r;
    if (s == "gd") {
      const double L = std::max(f.linf_smoothness(), 1e-12);
      r = gd_general_norm(h, L, static_cast<int>(baseline_budget(L, inst.epsilon, 200000)), x0);
    } else {
      std::vector<double> lj = f.coordinate_smoothness();
      double total = 0.0;
      for (double& v : lj) total += (v = std::max(v, 1e-12));
      const long steps = baseline_budget(total, inst.epsilon, 5000000);
      r = plain_cd(h, lj, steps, rng, x0, true, std::max(1L, steps / 1000));
    }
    out.x = r.x;
    out.value = residual_inf(inst.matrix, out.x, inst.rhs);
    out.iterations = r.coordinate_evals;
    out.trace = transcript_csv(r.transcript);
  } else {
    throw Usage("solver '" + s + "' does not solve regression problems");
  }
  return out;
}

int cmd_regress(const RunSpec& spec) {
  const MatrixFile mf = load_matrix(spec);
  const RegressionInstance inst = make_instance(mf, spec, spec.eps);
  Rng rng(spec.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const RegressOutcome r = run_regress(inst, spec, rng);
  const long long ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  if (!spec.out.empty()) {
    std::string text;
    for (double v : r.x) text += num(v) + '\n';
    write_file(spec.out, text);
  }
  if (!spec.trace.empty()) write_file(spec.trace, r.trace);
  summary("command", "regress");
  summary("solver", spec.solver);
  summary("rows", std::to_string(inst.matrix.rows()));
  summary("cols", std::to_string(inst.matrix.cols()));
  summary("epsilon", num(spec.eps));
  summary("seed", std::to_string(spec.seed));
  summary("value", real(r.value));
  if (std::isfinite(r.lower_bound)) summary("lower_bound", real(r.lower_bound));
  summary("iterations", std::to_string(r.iterations));
  if (spec.timing) summary("elapsed_ns", std::to_string(ns));
  return 0;
}

RouteOptions route_options(const RunSpec& spec, bool early_exit) {
  RouteOptions ro;
  ro.solver = parse_route_solver(spec.solver);
  ro.tau = spec.tau;
  ro.sparsity = spec.sparsity;
  ro.early_exit = early_exit;
  return ro;
}

std::string rounds_csv(const std::vector<RoundLog>& rounds) {
  std::string out = "round,accuracy,residual_before,residual_after,radius,contracted\n";
  for (const auto& r : rounds)
    out += std::to_string(r.round) + ',' + num(r.accuracy) + ',' + num(r.residual_before) + ',' +
           num(r.residual_after) + ',' + num(r.radius) + ',' + (r.contracted ? "1" : "0") + '\n';
  return out;
}

void emit_flow(const RunSpec& spec, const FlowNetwork& net, const FlowSolution& sol) {
  std::ostringstream text;
  write_flow(text, net, sol);
  if (spec.out.empty()) {
    std::cout << text.str();
  } else {
    write_file(spec.out, text.str());
    summary("value", num(sol.value));
    summary("congestion", num(sol.max_congestion()));
  }
}

int cmd_maxflow(const RunSpec& spec) {
  const FlowNetwork net = load_network(spec);
  Rng rng(spec.seed);
  if (spec.solver == "dinic") {
    emit_flow(spec, net, dinic(net));
    return 0;
  }
  std::vector<RoundLog> rounds;
  FlowSolution sol;
  if (net.directed) {
    // Approximate directed flows go through the undirected reduction.
    const DirectedReduction red = directed_reduce(net);
    ApproxMaxflowResult ap = approx_maxflow(red.undirected, spec.eps, rng, route_options(spec, false));
    std::vector<double> arcs = red.recover(ap.solution.flow);
    const double value = incidence_apply(net, arcs)[net.sink];
    sol = make_flow_solution(net, std::move(arcs), value);
    rounds = std::move(ap.rounds);
  } else {
    ApproxMaxflowResult ap = approx_maxflow(net, spec.eps, rng, route_options(spec, false));
    sol = std::move(ap.solution);
    rounds = std::move(ap.rounds);
  }
  if (!spec.trace.empty()) write_file(spec.trace, rounds_csv(rounds));
  emit_flow(spec, net, sol);
  return 0;
}

int cmd_exact(const RunSpec& spec) {
  const FlowNetwork net = load_network(spec);
  Rng rng(spec.seed);
  const ExactFlowResult r = exact_unit_maxflow(net, net.directed ? FlowMode::directed : FlowMode::undirected, rng,
                                               route_options(spec, true), spec.eps_set ? spec.eps : 0.0);
  if (!spec.trace.empty()) write_file(spec.trace, rounds_csv(r.rounds));
  const FlowSolution sol = make_flow_solution(net, r.state.flow, r.state.value);
  emit_flow(spec, net, sol);
  summary("epsilon", num(r.epsilon));
  summary("approx_value", num(r.approx_value));
  summary("rounded_value", std::to_string(r.rounded_value));
  summary("augmentations", std::to_string(r.state.augmentations));
  return 0;
}

int cmd_bench(const RunSpec& spec) {
  const MatrixFile mf = load_matrix(spec);
  std::string table = "epsilon,iterations,wall_ns,value\n";
  for (double eps : spec.grid) {
    if (!(eps > 0.0 && eps < 1.0)) throw Usage("grid values must lie in (0, 1)");
    Rng rng(spec.seed);
    const RegressionInstance inst = make_instance(mf, spec, eps);
    const auto t0 = std::chrono::steady_clock::now();
    RunSpec quiet = spec;
    quiet.trace.clear();
    const RegressOutcome r = run_regress(inst, quiet, rng);
    const long long ns =
        spec.timing ? std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count()
                    : 0;
    table += num(eps) + ',' + std::to_string(r.iterations) + ',' + std::to_string(ns) + ',' + num(r.value) + '\n';
  }
  if (spec.out.empty()) std::cout << table;
  else write_file(spec.out, table);
  return 0;
}

int cmd_verify(const RunSpec& spec) {
  const std::string text = read_file(spec.input);
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << "check " << name << ' ' << (ok ? "PASS" : "FAIL") << ' ' << detail << '\n';
    if (!ok) ++failures;
  };
  std::istringstream in(text);
  if (detect_format(spec, text) == "linf-matrix") {
    const MatrixFile mf = read_matrix(in);
    const double opt = oracle::linf_regression_opt(mf.matrix, mf.rhs);
    for (const char* s : {"cd-l2", "cd-diag", "mirror-prox"}) {
      RunSpec sub = spec;
      sub.solver = s;
      Rng rng(spec.seed);
      const RegressOutcome r = run_regress(make_instance(mf, spec, spec.eps), sub, rng);
      check(std::string("regress-") + s, r.value <= opt + spec.eps + 1e-9,
            "value " + num(r.value) + " optimum " + num(opt));
    }
  } else {
    const FlowNetwork net = read_dimacs(in);
    const double ref = oracle::edmonds_karp(net);
    const FlowSolution dn = dinic(net);
    check("dinic", std::abs(dn.value - ref) < 1e-9, "value " + num(dn.value) + " reference " + num(ref));
    bool unit = true;
    for (const Edge& e : net.edges) unit = unit && e.capacity == 1.0;
    if (!net.directed) {
      Rng rng(spec.seed);
      RunSpec sub = spec;
      sub.solver = "cd-diag";
      const ApproxMaxflowResult ap = approx_maxflow(net, spec.eps, rng, route_options(sub, false));
      check("approx-maxflow", ap.solution.value >= (1.0 - spec.eps) * ref - 1e-9,
            "value " + num(ap.solution.value) + " reference " + num(ref));
    }
    if (unit) {
      Rng rng(spec.seed);
      RunSpec sub = spec;
      sub.solver = "cd-diag";
      const ExactFlowResult ex = exact_unit_maxflow(net, net.directed ? FlowMode::directed : FlowMode::undirected,
                                                    rng, route_options(sub, true));
      check("exact-maxflow", std::abs(ex.state.value - ref) < 1e-9,
            "value " + num(ex.state.value) + " reference " + num(ref));
    }
  }
  summary("failures", std::to_string(failures));
  if (failures > 0) throw VerifyFailed(std::to_string(failures) + " check(s) failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-constrained l_inf regression and unit-capacity max flow"};
  app.require_subcommand(1);
  RunSpec spec;
  bool eps_set = false;

  auto common = [&](CLI::App* sub, const std::string& default_solver) {
    sub->add_option("input", spec.input, "Input file (linf-matrix or DIMACS)")->required();
    sub->add_option("--solver", spec.solver, "cd-l2, cd-diag, mirror-prox, gd, plain-cd or dinic")
        ->default_str(default_solver);
    sub->add_option("--eps", spec.eps, "Target accuracy in (0, 1)")->default_val(0.1);
    sub->add_option("--seed", spec.seed, "64-bit seed")->default_val(1);
    sub->add_option("--sparsity-s", spec.sparsity, "Estimate of |x*|_2^2; 0 uses the column count")->default_val(0.0);
    sub->add_option("--tau", spec.tau, "Mirror prox maintainer threshold")->default_val(1e-6);
    sub->add_option("--trace", spec.trace, "Write the solver trace CSV here");
    sub->add_option("--out,-o", spec.out, "Output file (solution, flow or table)");
    sub->add_option("--format", spec.format, "Input format; detected from the file when omitted")
        ->check(CLI::IsMember({"dimacs", "linf-matrix"}));
    sub->add_flag("--timing", spec.timing, "Record wall-clock times (outputs are then not reproducible)");
    sub->callback([&, sub, default_solver] {
      spec.command = sub->get_name();
      if (spec.solver.empty()) spec.solver = default_solver;
      eps_set = sub->count("--eps") > 0;
    });
  };
  common(app.add_subcommand("regress", "Solve min |Ax - b|_inf over the unit box"), "cd-diag");
  common(app.add_subcommand("maxflow", "Approximate s-t max flow"), "cd-diag");
  common(app.add_subcommand("exact-flow", "Exact unit-capacity max flow by rounding and augmenting"), "cd-diag");
  auto* bench = app.add_subcommand("bench", "Sweep eps and tabulate iterations, wall time and value");
  common(bench, "cd-diag");
  bench->add_option("--grid", spec.grid, "Accuracies to sweep")->default_str("0.1 0.05 0.025");
  common(app.add_subcommand("verify", "Compare solvers with reference oracles on one instance"), "cd-diag");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (!(spec.eps > 0.0 && spec.eps < 1.0)) throw Usage("--eps must lie in (0, 1)");
    spec.eps_set = eps_set;
    if (spec.command == "regress") return cmd_regress(spec);
    if (spec.command == "maxflow") return cmd_maxflow(spec);
    if (spec.command == "exact-flow") return cmd_exact(spec);
    if (spec.command == "bench") return cmd_bench(spec);
    return cmd_verify(spec);
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 4;
  } catch (const SolverFault& e) {
    std::cerr << "solver fault: " << e.what() << '\n';
    return 3;
  } catch (const VerifyFailed& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
