#include "linf/cd_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "linf/errors.hpp"

namespace linf {

namespace {

std::vector<double> static_weights(const LocalSmoothnessParams& prm) {
  std::vector<double> w(prm.static_part.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (prm.mode == RegMode::l2) w[j] = prm.static_part[j];
    else w[j] = prm.col_norm[j] > 0.0 ? prm.static_part[j] / prm.col_norm[j] : 0.0;
  }
  return w;
}

std::vector<double> dynamic_scale(const LocalSmoothnessParams& prm) {
  if (prm.mode == RegMode::l2) return prm.col_norm;
  return std::vector<double>(prm.col_norm.size(), 1.0);
}

std::vector<double> clamp_box(std::vector<double> x) {
  for (double& v : x) v = std::clamp(v, -1.0, 1.0);
  return x;
}

}  // namespace

CdIterate::CdIterate(const SparseMatrix& a, std::vector<double> rhs, std::vector<double> center,
                     const LocalSmoothnessParams& prm, std::vector<double> x0)
    : prm_(&prm),
      center_(std::move(center)),
      state_(a, std::move(rhs), prm.alpha, clamp_box(std::move(x0))),
      sampler_(state_, static_weights(prm), dynamic_scale(prm)) {}

void CdIterate::move(int j, double delta) {
  const bool rebuilt = state_.update(j, delta);
  sampler_.on_update(state_, j, rebuilt);
}

double CdIterate::gap_certificate() const {
  const std::vector<double>& x = state_.x();
  double acc = 0.0;
  for (int j = 0; j < static_cast<int>(x.size()); ++j) {
    const double w = prm_->norm_weight(j);
    if (w <= 0.0) continue;
    double g = grad(j);
    if (x[j] >= 1.0) g = std::max(g, 0.0);
    else if (x[j] <= -1.0) g = std::min(g, 0.0);
    acc += g * g / w;
  }
  return acc / (2.0 * prm_->mu());
}

CdStep lcd_step(CdIterate& it, Rng& rng) {
  const int j = it.sample(rng);
  const double g = it.grad(j);
  const double l = it.smoothness(j);
  CdStep step{j, g, l, 0.0};
  if (!(l > 0.0) || g == 0.0) return step;
  const double xj = it.x()[j];
  step.delta = std::clamp(xj - g / l, -1.0, 1.0) - xj;
  if (step.delta != 0.0) it.move(j, step.delta);
  return step;
}

SubproblemBounds subproblem_bounds(const SparseMatrix& a, const LocalSmoothnessParams& prm) {
  const double norm = a.norm_inf();
  const double n = a.rows(), m = a.cols();
  double sum_col = 0.0, min_w = std::numeric_limits<double>::infinity();
  int live = 0;
  for (int j = 0; j < a.cols(); ++j) {
    sum_col += prm.col_norm[j];
    if (prm.col_norm[j] > 0.0) {
      ++live;
      min_w = std::min(min_w, prm.col_norm[j]);
    }
  }
  SubproblemBounds b;
  b.mu = prm.mu();
  if (prm.mode == RegMode::l2) {
    b.total_smoothness = 8.0 / prm.alpha * norm * norm + 16.0 * std::min(m, n) * norm / prm.s + m * prm.alpha / prm.s;
    b.range = prm.alpha * std::log(n) + 2.0 * norm + 2.0 * prm.alpha * m / prm.s;
    b.min_norm_weight = 1.0;
  } else {
    b.total_smoothness = 8.0 * norm / prm.alpha + 16.0 * sum_col / prm.diag_scale + live * prm.alpha / prm.diag_scale;
    b.range = prm.alpha * std::log(n) + 2.0 * norm + 2.0 * prm.alpha * sum_col / prm.diag_scale;
    b.min_norm_weight = live > 0 ? min_w : 1.0;
  }
  return b;
}

double subproblem_target_gap(const SubproblemBounds& b, double delta_x) {
  return 0.5 * b.mu * b.min_norm_weight * delta_x * delta_x;
}

long subproblem_budget(const SubproblemBounds& b, double delta_x, double fail_prob) {
  const double gap = subproblem_target_gap(b, delta_x);
  const double k = (2.0 * b.total_smoothness / b.mu) * std::log(std::max(b.range / (gap * fail_prob), 1.0));
  return static_cast<long>(std::min(std::ceil(k), 1e15));
}

SubproblemResult solve_subproblem(const SparseMatrix& a, const std::vector<double>& rhs,
                                  const std::vector<double>& center, std::vector<double> warm,
                                  const LocalSmoothnessParams& prm, double delta_x, double fail_prob, Rng& rng,
                                  long max_iters) {
  if (!(delta_x > 0.0)) throw std::invalid_argument("solve_subproblem: delta_x must be positive");
  const SubproblemBounds bounds = subproblem_bounds(a, prm);
  const double target = subproblem_target_gap(bounds, delta_x);
  const long budget = max_iters >= 0 ? max_iters : subproblem_budget(bounds, delta_x, fail_prob);
  CdIterate it(a, rhs, center, prm, std::move(warm));
  // A full certificate costs O(nnz); checking every m steps keeps it O(c) amortized.
  const long check_every = std::max<long>(32, a.cols());
  SubproblemResult res;
  res.gap_bound = it.gap_certificate();
  while (res.gap_bound > target && res.iterations < budget) {
    const long stop = std::min(budget, res.iterations + check_every);
    for (; res.iterations < stop; ++res.iterations) lcd_step(it, rng);
    res.gap_bound = it.gap_certificate();
  }
  res.certified = res.gap_bound <= target;
  res.x = it.x();
  return res;
}

std::vector<double> dual_response(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b,
                                  const std::vector<double>& log_p, double alpha) {
  std::vector<double> w = a.multiply(x);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (w[i] - b[i]) / alpha + log_p[i];
  const double lse = log_sum_exp(w);
  for (double& v : w) v -= lse;
  return w;
}

ProxProblem ProxProblem::make(const RegressionInstance& inst, RegMode mode) {
  if (inst.radius != 1.0) throw std::invalid_argument("solve_box_linf: instance must be reduced to the unit box");
  if (!(inst.epsilon > 0.0)) throw std::invalid_argument("solve_box_linf: epsilon must be positive");
  ProxProblem pb;
  SignDoubled d = sign_double(inst.matrix, inst.rhs);
  pb.matrix = std::move(d.matrix);
  pb.rhs = std::move(d.rhs);
  pb.mode = mode;
  pb.epsilon = inst.epsilon;
  pb.s = inst.effective_sparsity();
  const double n = pb.matrix.rows(), m = std::max(1, pb.matrix.cols());
  const double norm = pb.matrix.norm_inf();
  const double width = mode == RegMode::l2 ? std::sqrt(pb.s / m) : std::sqrt(n / m);
  pb.alpha = inst.alpha_override ? *inst.alpha_override : std::max(inst.epsilon, width * norm);
  if (pb.alpha < inst.epsilon) throw std::invalid_argument("solve_box_linf: alpha must be at least epsilon");
  pb.params = LocalSmoothnessParams::make(pb.matrix, mode, pb.alpha, pb.s);
  pb.bounds = subproblem_bounds(pb.matrix, pb.params);
  // Half the accuracy goes to subproblem error, half to the alpha*Theta/T regret term.
  const double e = 0.5 * inst.epsilon;
  const double middle = mode == RegMode::l2 ? e * pb.s / (8.0 * pb.alpha * m) : e * n / (8.0 * pb.alpha * m);
  pb.delta_x = std::min({e / (16.0 * norm), middle, e * pb.alpha / (64.0 * norm * norm)});
  pb.outer_budget = 2 * static_cast<int>(std::ceil(pb.alpha * (1.0 + std::log(n)) / inst.epsilon));
  pb.fail_prob = 1.0 / (pb.outer_budget * n * n);
  return pb;
}

ProxOuterState ProxOuterState::initial(const ProxProblem& pb) {
  ProxOuterState st;
  st.x.assign(pb.matrix.cols(), 0.0);
  st.log_p.assign(pb.matrix.rows(), -std::log(static_cast<double>(pb.matrix.rows())));
  return st;
}

std::vector<double> ProxOuterState::p() const {
  std::vector<double> p(log_p.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_p[i]);
  return p;
}

ProxStep prox_outer_iterate(ProxOuterState& st, const ProxProblem& pb, Rng& rng) {
  std::vector<double> shifted(pb.rhs.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = pb.rhs[i] - pb.alpha * st.log_p[i];
  SubproblemResult sub =
      solve_subproblem(pb.matrix, shifted, st.x, st.x, pb.params, pb.delta_x, pb.fail_prob, rng);
  st.log_p = dual_response(pb.matrix, sub.x, pb.rhs, st.log_p, pb.alpha);
  st.x = std::move(sub.x);
  ++st.t;
  return {sub.iterations, sub.certified};
}

double dual_value(const SparseMatrix& a2, const std::vector<double>& b2, const std::vector<double>& p) {
  const std::vector<double> g = a2.multiply_transpose(p);
  double v = 0.0;
  for (double x : g) v -= std::abs(x);
  for (std::size_t i = 0; i < p.size(); ++i) v -= p[i] * b2[i];
  return v;
}

std::string transcript_csv(const std::vector<TranscriptRow>& rows) {
  std::string out = "outer_iter,inner_iters,objective,elapsed_ns,seed\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%.12g,%lld,%llu\n", r.outer_iter, r.inner_iters, r.objective, r.elapsed_ns,
                  static_cast<unsigned long long>(r.seed));
    out += buf;
  }
  return out;
}

BoxSolveResult solve_box_linf(const RegressionInstance& inst, RegMode mode, Rng& rng, const BoxSolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const int m = inst.matrix.cols();
  BoxSolveResult res;
  res.x.assign(m, 0.0);
  res.value = residual_inf(inst.matrix, res.x, inst.rhs);
  if (inst.matrix.norm_inf() == 0.0 || inst.matrix.rows() == 0) {
    res.lower_bound = res.value;  // x does not matter
    return res;
  }
  const ProxProblem pb = ProxProblem::make(inst, mode);
  res.alpha = pb.alpha;
  ProxOuterState st = ProxOuterState::initial(pb);
  res.lower_bound = dual_value(pb.matrix, pb.rhs, st.p());

  std::vector<double> sum_x(m, 0.0), sum_p(pb.matrix.rows(), 0.0);
  const int budget = opt.max_outer > 0 ? opt.max_outer : pb.outer_budget;
  auto consider = [&](const std::vector<double>& x) {
    const double v = residual_inf(inst.matrix, x, inst.rhs);
    if (v < res.value) {
      res.value = v;
      res.x = x;
    }
    return v;
  };
  for (int t = 0; t < budget; ++t) {
    const ProxStep step = prox_outer_iterate(st, pb, rng);
    res.inner_iters += step.inner_iters;
    res.outer_iters = st.t;
    const std::vector<double> p = st.p();
    for (int j = 0; j < m; ++j) sum_x[j] += st.x[j];
    for (std::size_t i = 0; i < p.size(); ++i) sum_p[i] += p[i];
    const double current = consider(st.x);
    std::vector<double> avg_x(m), avg_p(p.size());
    for (int j = 0; j < m; ++j) avg_x[j] = sum_x[j] / st.t;
    for (std::size_t i = 0; i < p.size(); ++i) avg_p[i] = sum_p[i] / st.t;
    consider(avg_x);
    res.lower_bound = std::max({res.lower_bound, dual_value(pb.matrix, pb.rhs, p), dual_value(pb.matrix, pb.rhs, avg_p)});
    long long ns = 0;
    if (opt.timing)
      ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    res.transcript.push_back({st.t, step.inner_iters, current, ns, rng.seed()});
    if (opt.early_stop && res.value - res.lower_bound <= inst.epsilon) break;
    if (res.value <= opt.stop_below || res.lower_bound > opt.stop_above) break;
  }
  return res;
}

}  // namespace linf
