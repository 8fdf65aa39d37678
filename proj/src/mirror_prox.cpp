#include "linf/mirror_prox.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "linf/cd_solver.hpp"
#include "linf/errors.hpp"
#include "linf/smoothing.hpp"

namespace linf {

namespace {

double clip(double v) { return std::clamp(v, -1.0, 1.0); }

std::vector<double> normalized_exp(const std::vector<double>& v) {
  const double lz = log_sum_exp(v);
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::exp(v[i] - lz);
  return y;
}

}  // namespace

MirrorProxConfig MirrorProxConfig::make(const SparseMatrix& a2, double epsilon, double s) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("mirror prox: epsilon must be positive");
  if (!(s > 0.0)) throw std::invalid_argument("mirror prox: sparsity parameter must be positive");
  MirrorProxConfig c;
  c.epsilon = epsilon;
  c.s = s;
  c.n = a2.rows();
  c.m = a2.cols();
  c.log_n = std::log(std::max(c.n, 2));
  c.C = std::sqrt(std::max(1, a2.col_sparsity()));
  // The row-conditional draw j | i is normalized per row, so the constant must also cover the
  // largest row weight sum_j sqrt(|a_j|_inf |A_ij|) for the lower bound on p_j to hold.
  double row_max = 0.0;
  for (int i = 0; i < c.n; ++i) {
    double r = 0.0;
    for (const Entry* e = a2.row_begin(i); e != a2.row_end(i); ++e)
      r += std::sqrt(a2.col_max_abs(e->index) * std::abs(e->value));
    row_max = std::max(row_max, r);
  }
  c.C_kappa = std::max(c.C, row_max);
  const double nm = static_cast<double>(c.n) * c.m;
  c.kappa = c.m * epsilon + 8.0 * std::sqrt(nm * epsilon) + 8.0 * c.C_kappa * std::sqrt(c.n * s) + 16.0 * c.n;
  c.T = std::max<long>(1, static_cast<long>(std::ceil(8.0 * c.kappa * c.log_n / epsilon)));
  const double theta0 = 1.0 + c.log_n;
  c.K = std::max(1, static_cast<int>(std::ceil(std::log2(16.0 * s * theta0 / (epsilon * epsilon)))));
  c.contraction = epsilon / (4.0 * c.kappa * c.log_n);
  c.entropy_weight = epsilon / (4.0 * c.log_n);
  return c;
}

ColumnWeights make_column_weights(const SparseMatrix& a2, const MirrorProxConfig& cfg) {
  ColumnWeights w;
  w.s = cfg.s;
  const int n = a2.rows(), m = a2.cols();
  w.col_inf = a2.col_max_abs();
  w.static_w.resize(m);
  for (int j = 0; j < m; ++j) w.static_w[j] = std::sqrt(cfg.epsilon * w.col_inf[j]);
  w.static_total = 0.0;
  for (double x : w.static_w) w.static_total += x;
  if (w.static_total > 0.0) w.static_alias = AliasTable(w.static_w);
  w.row_total.assign(n, 0.0);
  w.row_alias.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> ws;
    for (const Entry* e = a2.row_begin(i); e != a2.row_end(i); ++e) {
      ws.push_back(std::sqrt(cfg.s * w.col_inf[e->index] * std::abs(e->value)));
      w.row_total[i] += ws.back();
    }
    if (w.row_total[i] > 0.0)
      w.row_alias[i] = AliasTable(ws);
    else
      w.empty_rows.push_back(i);
  }
  const double a = cfg.C_kappa * std::sqrt(cfg.n * cfg.s);
  const double b = std::sqrt(static_cast<double>(cfg.m) * cfg.n * cfg.epsilon);
  w.heads = w.static_total > 0.0 ? a / (a + b) : 1.0;
  return w;
}

double lj_tilde(const SparseMatrix& a2, const std::vector<double>& y, int j, double s, double epsilon) {
  const double ninf = a2.col_max_abs(j);
  double acc = 0.0;
  for (const Entry* e = a2.col_begin(j); e != a2.col_end(j); ++e) acc += std::sqrt(std::abs(e->value) * y[e->index]);
  const double r = std::sqrt(s * ninf) * acc + std::sqrt(epsilon * ninf);
  return r * r;
}

double lj_plain(const SparseMatrix& a2, const std::vector<double>& y, int j, double s, double epsilon) {
  const double ninf = a2.col_max_abs(j);
  double acc = 0.0;
  for (const Entry* e = a2.col_begin(j); e != a2.col_end(j); ++e) acc += std::abs(e->value) * y[e->index];
  return s * ninf * acc + epsilon * ninf;
}

std::vector<double> sampling_law(const SparseMatrix& a2, const ColumnWeights& w, const std::vector<double>& y) {
  const int n = a2.rows(), m = a2.cols();
  std::vector<double> sq(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += sq[i] = std::sqrt(y[i]);
  for (double& v : sq) v /= total;
  double empty = 0.0;
  for (int i : w.empty_rows) empty += sq[i];
  std::vector<double> p(m);
  for (int j = 0; j < m; ++j) p[j] = w.conditional(a2, j, [&](int i) { return sq[i]; }, empty);
  return p;
}

double ColumnWeights::conditional(const SparseMatrix& a2, int j, const std::function<double(int)>& sqrt_y,
                                  double empty_mass) const {
  const int m = a2.cols();
  double branch = 0.0;
  for (const Entry* e = a2.col_begin(j); e != a2.col_end(j); ++e)
    branch += sqrt_y(e->index) * std::sqrt(s * col_inf[j] * std::abs(e->value)) / row_total[e->index];
  branch += empty_mass / m;
  const double other = static_total > 0.0 ? static_w[j] / static_total : 0.0;
  return 0.5 / m + 0.5 * (heads * branch + (1.0 - heads) * other);
}

std::string mirror_prox_csv(const std::vector<MirrorProxTraceRow>& rows) {
  std::ostringstream out;
  out << "phase,iter,sampled_j,p_j,objective_sample,divergence_estimate\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.phase << ',' << r.iter << ',' << r.sampled_j << ',' << r.p_j << ',' << r.objective_sample << ',';
    if (!std::isnan(r.divergence)) out << r.divergence;
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------- solver

MirrorProxSolver::MirrorProxSolver(const SparseMatrix& a2, std::vector<double> b2, MirrorProxConfig cfg,
                                   MirrorProxOptions opt)
    : a_(a2), b_(std::move(b2)), cfg_(cfg), opt_(std::move(opt)) {
  if (static_cast<int>(b_.size()) != a_.rows()) throw std::invalid_argument("mirror prox: rhs length mismatch");
  w_ = make_column_weights(a_, cfg_);
  if (opt_.backend == SimplexBackend::dense)
    y_ = std::make_unique<NaiveSimplex>(cfg_.n, cfg_.contraction);
  else
    y_ = std::make_unique<SimplexMaintainer>(cfg_.n, cfg_.contraction, cfg_.epsilon, opt_.tau);
}

PhaseState MirrorProxSolver::initial() const {
  PhaseState z;
  z.x.assign(cfg_.m, 0.0);
  z.y.assign(cfg_.n, 1.0 / cfg_.n);
  z.v.assign(cfg_.n, 0.0);
  return z;
}

double MirrorProxSolver::clamp_step(double xj, double grad, double p) const {
  return clip(xj - cfg_.s * grad / (cfg_.kappa * p));
}

void MirrorProxSolver::load(const PhaseState& in) {
  x_ = in.x;
  resid_ = a_.multiply(x_);
  for (int i = 0; i < cfg_.n; ++i) resid_[i] = b_[i] - resid_[i];
  y_->init(in.v);
  for (int i = 0; i < cfg_.n; ++i) y_->set_delta(i, resid_[i] / cfg_.kappa);
}

void MirrorProxSolver::move_x(int j, double value) {
  const double step = value - x_[j];
  if (step == 0.0) return;
  x_[j] = value;
  for (const Entry* e = a_.col_begin(j); e != a_.col_end(j); ++e) {
    resid_[e->index] -= e->value * step;
    y_->set_delta(e->index, resid_[e->index] / cfg_.kappa);
  }
}

std::pair<int, double> MirrorProxSolver::sample_pj(Rng& rng) {
  const int m = cfg_.m;
  int j;
  if (rng.uniform() < 0.5) {
    j = static_cast<int>(rng.below(m));
  } else if (rng.uniform() < w_.heads) {
    const int i = y_->sample(rng, 0.5).first;
    j = w_.row_total[i] > 0.0 ? a_.row_begin(i)[w_.row_alias[i].sample(rng)].index : static_cast<int>(rng.below(m));
  } else {
    j = w_.static_alias.sample(rng);
  }
  double empty = 0.0;
  for (int i : w_.empty_rows) empty += y_->sqrt_coord(i);
  const double p = w_.conditional(a_, j, [&](int i) { return y_->sqrt_coord(i); }, empty);
  return {j, p};
}

double MirrorProxSolver::divergence(const PhaseState& z, const std::vector<double>& x_ref,
                                    const std::vector<double>& y_ref) const {
  double dx = 0.0;
  for (int j = 0; j < cfg_.m; ++j) dx += (z.x[j] - x_ref[j]) * (z.x[j] - x_ref[j]);
  double kl = 0.0;
  const double lz = log_sum_exp(z.v);
  for (int i = 0; i < cfg_.n; ++i)
    if (y_ref[i] > 0.0) kl += y_ref[i] * (std::log(y_ref[i]) - (z.v[i] - lz));
  return dx / (2.0 * cfg_.s) + kl;
}

PhaseState MirrorProxSolver::run_phase(const PhaseState& in, int phase, Rng& rng, PhaseStats* stats) {
  Rng prng = rng.split(static_cast<std::uint64_t>(phase));
  const long stop = opt_.fixed_stop > 0 ? std::min(opt_.fixed_stop, cfg_.T) : 1 + static_cast<long>(prng.below(cfg_.T));
  load(in);
  PhaseStats local;
  PhaseStats& st = stats ? *stats : local;
  st = PhaseStats{};
  st.stop = stop;
  const double reg = cfg_.epsilon / (2.0 * cfg_.s);
  SparseVec zeta;
  for (long t = 1; t < stop; ++t) {
    std::vector<double> y_t;
    if (opt_.instrument) {
      y_t = normalized_exp(y_->log_weights());
      double lsum = 0.0;
      for (int j = 0; j < cfg_.m; ++j) lsum += std::sqrt(lj_tilde(a_, y_t, j, cfg_.s, cfg_.epsilon));
      st.max_lsum = std::max(st.max_lsum, lsum);
      for (int i = 0; i < cfg_.n; ++i) st.max_delta = std::max(st.max_delta, std::abs(resid_[i] / cfg_.kappa));
    }
    const auto [j, p] = sample_pj(prng);
    double g = reg * x_[j];
    for (const Entry* e = a_.col_begin(j); e != a_.col_end(j); ++e) g += e->value * y_->coord(e->index);
    const double x_half = clamp_step(x_[j], g, p);
    const double step = x_half - x_[j];
    y_->update_half();
    double g2 = reg * x_half;
    for (const Entry* e = a_.col_begin(j); e != a_.col_end(j); ++e) g2 += e->value * y_->coord_half(e->index);
    const double x_next = clamp_step(x_[j], g2, p);
    zeta.clear();
    if (step != 0.0)
      for (const Entry* e = a_.col_begin(j); e != a_.col_end(j); ++e)
        zeta.push_back({e->index, -e->value * step / (cfg_.kappa * p)});
    std::vector<double> y_half;
    if (opt_.instrument) {
      y_half = normalized_exp(y_->log_weights_half());
      for (const auto& [i, z] : zeta) st.max_delta = std::max(st.max_delta, std::abs(resid_[i] / cfg_.kappa + z));
    }
    y_->update(zeta);
    if (opt_.instrument) {
      const std::vector<double> y_next = normalized_exp(y_->log_weights());
      for (int i = 0; i < cfg_.n; ++i)
        st.max_ratio = std::max({st.max_ratio, y_half[i] / y_t[i], y_next[i] / y_t[i]});
    }
    move_x(j, x_next);
    ++st.iterations;
    if (opt_.trace && (t - 1) % opt_.trace_every == 0) {
      double obj = 0.0;
      for (double r : resid_) obj = std::max(obj, -r);  // doubled rows: max of (Ax - b) over signs
      double div = std::numeric_limits<double>::quiet_NaN();
      if (opt_.reference) {
        PhaseState cur{x_, {}, y_->log_weights()};
        div = divergence(cur, opt_.reference->first, opt_.reference->second);
      }
      trace_.push_back({phase, t, j, p, obj, div});
    }
    if (opt_.on_iteration && opt_.on_iteration(IterationView{phase, t, j, p, &x_, &resid_})) {
      st.stopped_by_callback = true;
      break;
    }
  }

  // Aggregate point: every coordinate's half step from x_t under the exact current y.
  const std::vector<double> v = y_->log_weights();
  const std::vector<double> y = normalized_exp(v);
  const std::vector<double> p = sampling_law(a_, w_, y);
  const std::vector<double> aty = a_.multiply_transpose(y);
  PhaseState out;
  out.x = x_;
  for (int j = 0; j < cfg_.m; ++j) out.x[j] = clamp_step(x_[j], aty[j] + reg * x_[j], p[j]);
  out.v.resize(cfg_.n);
  const double c = cfg_.contraction;
  for (int i = 0; i < cfg_.n; ++i) out.v[i] = (1.0 - c) * v[i] - resid_[i] / cfg_.kappa;
  const double top = *std::max_element(out.v.begin(), out.v.end());
  for (double& x : out.v) x -= top;
  out.y = normalized_exp(out.v);
  return out;
}

// ---------------------------------------------------------------- driver

FlowRegressResult solve_flow_regress(const RegressionInstance& inst, Rng& rng, const MirrorProxOptions& opt) {
  if (inst.radius != 1.0) {
    const UnitBoxReduction red = reduce_to_unit_box(inst, std::vector<double>(inst.matrix.cols(), 0.0));
    FlowRegressResult r = solve_flow_regress(red.unit, rng, opt);
    r.x = red.to_original(r.x);
    r.value = residual_inf(inst.matrix, r.x, inst.rhs);
    r.lower_bound *= inst.radius;
    return r;
  }
  const int m = inst.matrix.cols();
  FlowRegressResult best;
  if (m == 0 || inst.matrix.nnz() == 0) {
    best.x.assign(m, 0.0);
    best.value = norm_inf(inst.rhs);
    best.lower_bound = best.value;
    return best;
  }
  // Scale so that |A|_inf <= 1 and |b|_inf <= 1; the guarantees are stated for that shape.
  const double scale = std::max({1.0, inst.matrix.norm_inf(), norm_inf(inst.rhs)});
  std::vector<Triplet> trip = inst.matrix.triplets_by_col();
  for (auto& t : trip) t.value /= scale;
  const SparseMatrix a = build_from_triplets(std::move(trip), inst.matrix.rows(), m);
  std::vector<double> b = inst.rhs;
  for (double& v : b) v /= scale;
  const double eps = inst.epsilon / scale;
  const SignDoubled d = sign_double(a, b);
  const MirrorProxConfig cfg = MirrorProxConfig::make(d.matrix, eps, inst.effective_sparsity());
  const int phases = opt.max_phases > 0 ? opt.max_phases : cfg.K;
  const int runs = std::max(1, opt.boost_runs);
  bool have = false;
  long total_iters = 0;
  for (int r = 0; r < runs; ++r) {
    Rng rr = rng.split(static_cast<std::uint64_t>(r));
    MirrorProxSolver solver(d.matrix, d.rhs, cfg, opt);
    PhaseState z = solver.initial();
    int done = 0;
    double value = residual_inf(a, z.x, b), lower = dual_value(d.matrix, d.rhs, z.y);
    for (int k = 0; k < phases; ++k) {
      PhaseStats st;
      z = solver.run_phase(z, k, rr, &st);
      total_iters += st.iterations;
      ++done;
      value = residual_inf(a, z.x, b);
      lower = std::max(lower, dual_value(d.matrix, d.rhs, z.y));
      if (st.stopped_by_callback) break;
      if (opt.early_stop && value - lower <= eps) break;
    }
    if (!have || value < best.value) {
      have = true;
      best.x = z.x;
      best.value = value;
      best.lower_bound = lower;
      best.phases = done;
      best.transcript = solver.transcript();
    }
  }
  best.value = residual_inf(inst.matrix, best.x, inst.rhs);
  best.lower_bound *= scale;
  best.iterations = total_iters;
  best.runs = runs;
  best.config = cfg;
  double sq = 0.0;
  for (double v : best.x) sq += v * v;
  best.sparsity_warning = sq > 2.0 * cfg.s;
  return best;
}

}  // namespace linf
