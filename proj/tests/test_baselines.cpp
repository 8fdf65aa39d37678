#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "linf/baselines.hpp"
#include "oracles.hpp"

using namespace linf;

namespace {

// Box minimum of smax_alpha(Ax - b) by projected gradient descent with a Frobenius step.
double smax_min(const SmaxObjective& f, int m) {
  double fro = 0;
  for (auto& t : f.matrix().triplets_by_col()) fro += t.value * t.value;
  const double step = f.alpha() / fro;
  std::vector<double> x(m, 0.0);
  for (int k = 0; k < 200000; ++k) {
    auto g = f.gradient(x);
    for (int j = 0; j < m; ++j) x[j] = std::clamp(x[j] - step * g[j], -1.0, 1.0);
  }
  return f.value(x);
}

ObjectiveHandle separable(std::vector<double> c) {
  ObjectiveHandle h;
  h.value = [c](const std::vector<double>& x) {
    double v = 0;
    for (std::size_t j = 0; j < x.size(); ++j) v += 0.5 * c[j] * x[j] * x[j];
    return v;
  };
  h.gradient = [c](const std::vector<double>& x) {
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = c[j] * x[j];
    return g;
  };
  return h;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("one l2 step solves a unit quadratic") {
    auto r = gd_general_norm(separable({1.0}), 1.0, 1, {1.0}, StepNorm::l2);
    CHECK(r.x[0] == 0.0);
    CHECK(r.values == std::vector<double>{0.5, 0.0});
  }

  TEST_CASE("l_inf steps decrease by the dual-norm progress bound") {
    Rng rng(1);
    SparseMatrix a0 = oracle::random_matrix(rng, 8, 6, 3);
    SignDoubled sd = sign_double(a0, oracle::random_vector(rng, 8, -1, 1));
    SmaxObjective f(sd.matrix, sd.rhs, 0.1);
    auto h = make_handle(f);
    const double L = f.linf_smoothness();
    std::vector<double> x = oracle::random_vector(rng, 6, -1, 1);
    for (int k = 0; k < 200; ++k) {
      auto g = f.gradient(x);
      double dual = 0;
      for (double v : g) dual += std::abs(v);
      auto r = gd_general_norm(h, L, 1, x, StepNorm::linf, false);
      CHECK(r.values[1] <= r.values[0] - dual * dual / (2 * L) + 1e-12);
      x = r.x;
    }
  }

  TEST_CASE("gd is monotone and meets the 2LR^2/T rate") {
    Rng rng(2);
    SparseMatrix a0 = oracle::random_matrix(rng, 5, 4, 2);
    auto b0 = oracle::random_vector(rng, 5, -2, 2);
    SignDoubled sd = sign_double(a0, b0);
    SmaxObjective f(sd.matrix, sd.rhs, 0.2);
    const double fstar = smax_min(f, 4);
    const double opt = oracle::linf_regression_opt(a0, b0);
    // smax sits between the max and the max plus alpha log n.
    CHECK(fstar >= opt - 1e-9);
    CHECK(fstar <= opt + 0.2 * std::log(10.0) + 1e-9);
    const double L = f.linf_smoothness();
    const int T = 400;
    auto r = gd_general_norm(make_handle(f), L, T, std::vector<double>(4, 0.0));
    for (int k = 0; k < T; ++k) CHECK(r.values[k + 1] <= r.values[k] + 1e-12);
    const double R = 2.0;  // l_inf diameter of the box
    CHECK(r.values.back() - fstar <= 2 * L * R * R / T);
  }

  TEST_CASE("plain cd zeroes one separable coordinate per step") {
    std::vector<double> c{1.0, 3.0, 0.5};
    Rng rng(3);
    auto r = plain_cd(separable(c), c, 1, rng, {1, 1, 1});
    CHECK(std::count(r.x.begin(), r.x.end(), 0.0) == 1);
    auto many = plain_cd(separable(c), c, 50, rng, {1, 1, 1});
    for (double v : many.x) CHECK((v == 0.0 || v == 1.0));
  }

  TEST_CASE("symmetric constants pick both coordinates evenly") {
    Rng rng(4);
    const int N = 20000;
    int first = 0;
    for (int k = 0; k < N; ++k) {
      auto r = plain_cd(separable({2.0, 2.0}), {2.0, 2.0}, 1, rng, {1, 1});
      first += r.x[0] == 0.0;
    }
    CHECK(std::abs(first / double(N) - 0.5) <= 3 * std::sqrt(0.25 / N));
  }

  TEST_CASE("plain cd mean gap within twice the 2SR^2/T rate") {
    Rng rng(5);
    SparseMatrix a0 = oracle::random_matrix(rng, 5, 4, 2);
    auto b0 = oracle::random_vector(rng, 5, -2, 2);
    SignDoubled sd = sign_double(a0, b0);
    SmaxObjective f(sd.matrix, sd.rhs, 0.2);
    const double fstar = smax_min(f, 4);
    auto lj = f.coordinate_smoothness();
    double S = 0;
    for (double v : lj) S += v;
    const double R2 = 4.0 * 4;  // squared l2 diameter of the box
    const long T = 200;
    double mean = 0;
    const int runs = 200;
    for (int k = 0; k < runs; ++k) {
      auto r = plain_cd(make_handle(f), lj, T, rng, std::vector<double>(4, 0.0), true, T);
      mean += (r.values.back() - fstar) / runs;
    }
    CHECK(mean >= -1e-9);
    CHECK(mean <= 2 * (2 * S * R2 / T));
  }

  TEST_CASE("budgets must be positive") {
    CHECK_THROWS(gd_general_norm(separable({1.0}), 1.0, 0, {1.0}));
    Rng rng(6);
    CHECK_THROWS(plain_cd(separable({1.0}), {1.0}, 0, rng, {1.0}));
  }
}
