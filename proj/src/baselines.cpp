#include "linf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace linf {

ObjectiveHandle make_handle(const SmaxObjective& f) {
  ObjectiveHandle h;
  h.value = [&f](const std::vector<double>& x) { return f.value(x); };
  h.gradient = [&f](const std::vector<double>& x) { return f.gradient(x); };
  h.partial = [&f](const std::vector<double>& x, int j) {
    const std::vector<double> p = softmax_of(f.residual(x), f.alpha());
    const SparseMatrix& a = f.matrix();
    double g = 0.0;
    for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e) g += e->value * p[e->index];
    return g;
  };
  return h;
}

namespace {

// Minimizes <g, d> + (L/2)||d||_inf^2 over d with x + d in the box.
// Along radius rho the best d moves each coordinate by min(rho, room_j) against sign(g_j),
// so the objective is convex in rho with slope L rho - sum_{room_j > rho} |g_j|.
std::vector<double> linf_step(const std::vector<double>& x, const std::vector<double>& g, double l, bool box) {
  const int m = static_cast<int>(x.size());
  std::vector<double> room(m);
  for (int j = 0; j < m; ++j) {
    if (!box) room[j] = std::numeric_limits<double>::infinity();
    else room[j] = g[j] > 0 ? x[j] + 1.0 : (g[j] < 0 ? 1.0 - x[j] : 0.0);
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return room[a] < room[b]; });
  double active = 0.0;
  for (int j = 0; j < m; ++j) active += std::abs(g[j]) * (room[j] > 0.0);
  double rho = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double next = k < m ? room[order[k]] : std::numeric_limits<double>::infinity();
    if (next <= 0.0) continue;
    const double cand = active / l;  // stationary point if the active set stays fixed
    if (cand <= next) {
      rho = cand;
      break;
    }
    rho = next;
    active -= std::abs(g[order[k]]);
  }
  std::vector<double> y(x);
  for (int j = 0; j < m; ++j) {
    if (g[j] == 0.0) continue;
    const double mv = std::min(rho, room[j]);
    y[j] = g[j] > 0 ? x[j] - mv : x[j] + mv;
    if (box) y[j] = std::clamp(y[j], -1.0, 1.0);
  }
  return y;
}

}  // namespace

BaselineResult gd_general_norm(const ObjectiveHandle& f, double smoothness, int steps, std::vector<double> x0,
                               StepNorm norm, bool box) {
  if (!(smoothness > 0.0) || steps < 1) throw std::invalid_argument("gd_general_norm: need L > 0 and at least one step");
  BaselineResult res;
  res.x = std::move(x0);
  res.values.push_back(f.value(res.x));
  for (int k = 0; k < steps; ++k) {
    const std::vector<double> g = f.gradient(res.x);
    res.coordinate_evals += static_cast<long>(g.size());
    if (norm == StepNorm::linf) {
      res.x = linf_step(res.x, g, smoothness, box);
    } else {
      for (std::size_t j = 0; j < g.size(); ++j) {
        res.x[j] -= g[j] / smoothness;
        if (box) res.x[j] = std::clamp(res.x[j], -1.0, 1.0);
      }
    }
    res.values.push_back(f.value(res.x));
    res.transcript.push_back({k + 1, static_cast<long>(g.size()), res.values.back(), 0, 0});
  }
  return res;
}

BaselineResult plain_cd(const ObjectiveHandle& f, const std::vector<double>& coord_smoothness, long steps, Rng& rng,
                        std::vector<double> x0, bool box, long record_every) {
  if (steps < 1) throw std::invalid_argument("plain_cd: budget must be at least one step");
  AliasTable pick(coord_smoothness);
  BaselineResult res;
  res.x = std::move(x0);
  res.values.push_back(f.value(res.x));
  for (long k = 0; k < steps; ++k) {
    const int j = pick.sample(rng);
    const double g = f.partial ? f.partial(res.x, j) : f.gradient(res.x)[j];
    ++res.coordinate_evals;
    double xj = res.x[j] - g / coord_smoothness[j];
    if (box) xj = std::clamp(xj, -1.0, 1.0);
    res.x[j] = xj;
    if ((k + 1) % record_every == 0 || k + 1 == steps) {
      res.values.push_back(f.value(res.x));
      res.transcript.push_back({static_cast<int>(k + 1), 1, res.values.back(), 0, rng.seed()});
    }
  }
  return res;
}

}  // namespace linf
