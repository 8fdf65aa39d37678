#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "linf/errors.hpp"
#include "linf/instance.hpp"
#include "linf/sparse.hpp"
#include "oracles.hpp"

using namespace linf;

namespace {

std::vector<std::vector<double>> dense(const SparseMatrix& a) {
  std::vector<std::vector<double>> d(a.rows(), std::vector<double>(a.cols(), 0.0));
  for (int j = 0; j < a.cols(); ++j)
    for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e) d[e->index][j] = e->value;
  return d;
}

}  // namespace

TEST_SUITE("instance") {
  TEST_CASE("identity triplets") {
    SparseMatrix a = build_from_triplets({{0, 0, 1}, {1, 1, 1}}, 2, 2);
    CHECK(a.rows() == 2);
    CHECK(a.nnz() == 2);
    CHECK(a.norm_inf() == 1.0);
    CHECK(a.col_sparsity() == 1);
  }

  TEST_CASE("signed 2x2 has norm 2 and column sparsity 2") {
    SparseMatrix a = build_from_triplets({{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, -1}}, 2, 2);
    CHECK(a.norm_inf() == 2.0);
    CHECK(a.col_sparsity() == 2);
    CHECK(a.col_max_abs(1) == 1.0);
  }

  TEST_CASE("row and column views agree on a random matrix") {
    Rng rng(11);
    SparseMatrix a = oracle::random_matrix(rng, 20, 30, 5);
    auto by_col = a.triplets_by_col();
    auto by_row = a.triplets_by_row();
    auto key = [](const Triplet& t) { return std::make_tuple(t.row, t.col, t.value); };
    std::vector<std::tuple<int, int, double>> kc, kr;
    for (auto& t : by_col) kc.push_back(key(t));
    for (auto& t : by_row) kr.push_back(key(t));
    std::sort(kc.begin(), kc.end());
    std::sort(kr.begin(), kr.end());
    CHECK(kc == kr);
    CHECK(kc.size() == 150);

    // Cached norms against recomputation from the triplets.
    std::vector<double> col_max(30, 0.0), row_l1(20, 0.0);
    for (auto& [i, j, v] : kc) {
      col_max[j] = std::max(col_max[j], std::abs(v));
      row_l1[i] += std::abs(v);
    }
    for (int j = 0; j < 30; ++j) CHECK(a.col_max_abs(j) == col_max[j]);
    for (int i = 0; i < 20; ++i) CHECK(a.row_l1(i) == doctest::Approx(row_l1[i]).epsilon(1e-14));
    CHECK(a.norm_inf() == doctest::Approx(*std::max_element(row_l1.begin(), row_l1.end())).epsilon(1e-14));
  }

  TEST_CASE("bad triplets are rejected") {
    CHECK_THROWS_AS(build_from_triplets({{2, 0, 1}}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_from_triplets({{0, -1, 1}}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_from_triplets({{0, 0, 1}, {0, 0, 2}}, 2, 2), std::invalid_argument);
    try {
      build_from_triplets({{5, 0, 1}}, 2, 2);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("(5, 0)") != std::string::npos);
    }
    SparseMatrix z = build_from_triplets({{0, 0, 0.0}, {1, 1, 3}}, 2, 2);
    CHECK(z.nnz() == 1);
  }

  TEST_CASE("sign doubling of a scalar") {
    SparseMatrix a = build_from_triplets({{0, 0, 2}}, 1, 1);
    SignDoubled d = sign_double(a, {3});
    REQUIRE(d.matrix.rows() == 2);
    auto m = dense(d.matrix);
    CHECK(m[0][0] == 2.0);
    CHECK(m[1][0] == -2.0);
    CHECK(d.rhs == std::vector<double>{3, -3});
  }

  TEST_CASE("sign doubling recovers the max norm") {
    // Ax - b = (1, -4) with A = I, x = 0, b = (-1, 4).
    SparseMatrix id = build_from_triplets({{0, 0, 1}, {1, 1, 1}}, 2, 2);
    SignDoubled d = sign_double(id, {-1, 4});
    auto r = d.matrix.multiply({0, 0});
    double mx = -1e300;
    for (int i = 0; i < 4; ++i) mx = std::max(mx, r[i] - d.rhs[i]);
    CHECK(mx == 4.0);

    Rng rng(5);
    SparseMatrix a = oracle::random_matrix(rng, 10, 10, 3);
    auto b = oracle::random_vector(rng, 10, -1, 1);
    SignDoubled s = sign_double(a, b);
    auto da = dense(a);
    for (int k = 0; k < 100; ++k) {
      auto x = oracle::random_vector(rng, 10, -2, 2);
      double want = 0.0;
      for (int i = 0; i < 10; ++i) {
        double v = -b[i];
        for (int j = 0; j < 10; ++j) v += da[i][j] * x[j];
        want = std::max(want, std::abs(v));
      }
      auto ax = s.matrix.multiply(x);
      double got = -1e300;
      for (int i = 0; i < 20; ++i) got = std::max(got, ax[i] - s.rhs[i]);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }

  TEST_CASE("unit box reduction with radius one and zero center is the identity") {
    RegressionInstance inst;
    inst.matrix = build_from_triplets({{0, 0, 1}, {1, 1, 2}}, 2, 2);
    inst.rhs = {0.5, -0.25};
    inst.epsilon = 0.1;
    UnitBoxReduction red = reduce_to_unit_box(inst, {0, 0});
    CHECK(red.unit.radius == 1.0);
    CHECK(red.unit.rhs == inst.rhs);
    CHECK(red.unit.epsilon == inst.epsilon);
    CHECK(red.to_original({0.3, -0.7}) == std::vector<double>{0.3, -0.7});
  }

  TEST_CASE("unit box reduction of a scaled identity") {
    RegressionInstance inst;
    inst.matrix = build_from_triplets({{0, 0, 1}, {1, 1, 1}}, 2, 2);
    inst.rhs = {4, 4};
    inst.radius = 2;
    inst.epsilon = 0.2;
    UnitBoxReduction red = reduce_to_unit_box(inst, {0, 0});
    CHECK(red.unit.rhs == std::vector<double>{2, 2});
    CHECK(red.unit.epsilon == doctest::Approx(0.1));
    // Per coordinate min over |t| <= 1 of |t - 2| is at t = 1.
    std::vector<double> xu;
    CHECK(oracle::linf_regression_opt(red.unit.matrix, red.unit.rhs, &xu) == doctest::Approx(1.0));
    auto x = red.to_original(xu);
    CHECK(x[0] == doctest::Approx(2.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(residual_inf(inst.matrix, x, inst.rhs) == doctest::Approx(2.0));
  }

  TEST_CASE("unconstrained problem through a promised box matches grid search") {
    RegressionInstance inst;
    inst.matrix = build_from_triplets({{0, 0, 1}, {0, 1, 2}, {1, 0, -1}, {1, 1, 1}, {2, 0, 1}}, 3, 2);
    inst.rhs = {1.3, -0.4, 0.9};
    // The unconstrained minimizer lies in the box of radius 0.5 around (0.5, 0.5).
    inst.radius = 0.5;
    UnitBoxReduction red = reduce_to_unit_box(inst, {0.5, 0.5});
    std::vector<double> xu;
    double unit_opt = oracle::linf_regression_opt(red.unit.matrix, red.unit.rhs, &xu);
    auto x = red.to_original(xu);
    double value = residual_inf(inst.matrix, x, inst.rhs);
    CHECK(unit_opt * 0.5 == doctest::Approx(value).epsilon(1e-9));

    auto res = [&](double u, double v) {
      return std::max({std::abs(u + 2 * v - 1.3), std::abs(-u + v + 0.4), std::abs(u - 0.9)});
    };
    double best = 1e300, bu = 0, bv = 0;
    for (int i = -1000; i <= 2000; ++i)
      for (int k = -1000; k <= 2000; ++k) {
        double r = res(i * 1e-3, k * 1e-3);
        if (r < best) best = r, bu = i * 1e-3, bv = k * 1e-3;
      }
    REQUIRE(std::abs(bu - 0.5) < 0.5);
    REQUIRE(std::abs(bv - 0.5) < 0.5);
    CHECK(value <= best + 1e-12);
    CHECK(value >= best - 3e-3);
  }

  TEST_CASE("unit box round trip") {
    Rng rng(3);
    RegressionInstance inst;
    inst.matrix = oracle::random_matrix(rng, 6, 5, 2);
    inst.rhs = oracle::random_vector(rng, 6, -1, 1);
    inst.radius = 3.5;
    auto center = oracle::random_vector(rng, 5, -4, 4);
    UnitBoxReduction red = reduce_to_unit_box(inst, center);
    for (int k = 0; k < 20; ++k) {
      auto x = oracle::random_vector(rng, 5, -10, 10);
      auto back = red.to_original(red.to_unit(x));
      for (int j = 0; j < 5; ++j) CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-12));
    }
    inst.radius = 0;
    CHECK_THROWS_AS(reduce_to_unit_box(inst, center), std::invalid_argument);
  }

  TEST_CASE("incidence of a single edge and a circulation") {
    FlowNetwork one;
    one.n = 2;
    one.directed = true;
    one.add_edge(0, 1, 1);
    CHECK(incidence_apply(one, {1}) == std::vector<double>{-1, 1});
    CHECK_THROWS_AS(incidence_apply(one, {1, 2}), std::invalid_argument);

    FlowNetwork tri;
    tri.n = 3;
    tri.directed = true;
    tri.add_edge(0, 1, 1);
    tri.add_edge(1, 2, 1);
    tri.add_edge(2, 0, 1);
    for (double v : incidence_apply(tri, {1, 1, 1})) CHECK(std::abs(v) <= 1e-12);
  }

  TEST_CASE("incidence matches a dense product on a random network") {
    Rng rng(9);
    FlowNetwork net = oracle::random_unit_graph(rng, 12, 30);
    auto f = oracle::random_vector(rng, net.m(), -2, 2);
    std::vector<std::vector<double>> b(net.n, std::vector<double>(net.m(), 0.0));
    for (int e = 0; e < net.m(); ++e) {
      b[net.edges[e].tail][e] -= 1;
      b[net.edges[e].head][e] += 1;
    }
    auto got = incidence_apply(net, f);
    for (int v = 0; v < net.n; ++v) {
      double want = 0.0;
      for (int e = 0; e < net.m(); ++e) want += b[v][e] * f[e];
      CHECK(got[v] == doctest::Approx(want).epsilon(1e-12));
    }
    auto sol = make_flow_solution(net, f, 0.0);
    for (int e = 0; e < net.m(); ++e) CHECK(sol.congestion[e] == f[e] / net.edges[e].capacity);
  }

  TEST_CASE("undirected edges are stored low to high") {
    FlowNetwork g;
    g.n = 3;
    g.add_edge(2, 0, 1);
    CHECK(g.edges[0].tail == 0);
    CHECK(g.edges[0].head == 2);
  }

  TEST_CASE("readers report positions") {
    std::istringstream bad("linf-matrix v1 2 2 1\n0 x 1\n");
    try {
      read_matrix(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
      CHECK(e.column == 3);
    }
    std::istringstream good("linf-matrix v1 2 2 2\n0 0 1\n1 1 -2\nb 0 0.5\n");
    MatrixFile mf = read_matrix(good);
    CHECK(mf.matrix.norm_inf() == 2.0);
    CHECK(mf.rhs == std::vector<double>{0.5, 0.0});
    std::ostringstream out;
    write_matrix(out, mf.matrix, mf.rhs);
    std::istringstream again(out.str());
    MatrixFile mf2 = read_matrix(again);
    CHECK(mf2.matrix.triplets_by_col().size() == 2);
    CHECK(mf2.rhs == mf.rhs);

    std::istringstream dm("c undirected\np max 3 2\nn 1 s\nn 3 t\na 1 2 1\na 3 2 1\n");
    FlowNetwork net = read_dimacs(dm);
    CHECK_FALSE(net.directed);
    CHECK(net.source == 0);
    CHECK(net.sink == 2);
    CHECK(net.edges[1].tail == 1);
  }
}
