#include "linf/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace linf {

namespace {
constexpr double kDriftLimit = 30.0;
constexpr double kUnitRoundoff = 0x1.0p-53;
}  // namespace

SoftmaxState::SoftmaxState(const SparseMatrix& a, std::vector<double> rhs, double alpha, std::vector<double> x)
    : a_(&a), rhs_(std::move(rhs)), alpha_(alpha), x_(std::move(x)) {
  if (!(alpha > 0.0)) throw std::invalid_argument("SoftmaxState: alpha must be positive");
  if (static_cast<int>(rhs_.size()) != a.rows() || static_cast<int>(x_.size()) != a.cols())
    throw std::invalid_argument("SoftmaxState: dimension mismatch");
  if (a.rows() == 0) throw std::invalid_argument("SoftmaxState: matrix has no rows");
  w_ = a.multiply(x_);
  for (int i = 0; i < a.rows(); ++i) w_[i] = (w_[i] - rhs_[i]) / alpha_;
  rebuild();
}

void SoftmaxState::rebuild() {
  shift_ = *std::max_element(w_.begin(), w_.end());
  z_ = 0.0;
  for (double w : w_) z_ += std::exp(w - shift_);
  z_err_ = kUnitRoundoff * z_ * static_cast<double>(w_.size());
  ++rebuilds_;
  ++version_;
}

double SoftmaxState::weight(int i) const { return std::exp(w_[i] - shift_); }

double SoftmaxState::log_partition() const { return shift_ + std::log(z_); }

bool SoftmaxState::update(int j, double delta) {
  if (delta == 0.0) return false;
  x_[j] += delta;
  bool drift = false;
  for (const Entry* e = a_->col_begin(j); e != a_->col_end(j); ++e) {
    const double old_w = w_[e->index];
    const double new_w = old_w + e->value * delta / alpha_;
    w_[e->index] = new_w;
    if (new_w > shift_ + kDriftLimit) {
      drift = true;
      continue;
    }
    const double eo = std::exp(old_w - shift_), en = std::exp(new_w - shift_);
    z_ += en - eo;
    z_err_ += kUnitRoundoff * (eo + en + std::abs(z_));
  }
  // Rebuild on overflow risk, or once cancellation may have cost 1e-12 relative accuracy.
  if (drift || !(z_err_ <= 1e-12 * z_)) {
    rebuild();
    return true;
  }
  ++version_;
  return false;
}

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

double smax_of(const std::vector<double>& residual, double alpha) {
  std::vector<double> w(residual.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = residual[i] / alpha;
  return alpha * log_sum_exp(w);
}

std::vector<double> softmax_of(const std::vector<double>& residual, double alpha) {
  std::vector<double> w(residual.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = residual[i] / alpha;
  const double lse = log_sum_exp(w);
  for (double& x : w) x = std::exp(x - lse);
  return w;
}

double smax_eval(const SoftmaxState& st) { return st.alpha() * st.log_partition(); }

std::vector<double> softmax_distribution(const SoftmaxState& st) {
  std::vector<double> p(st.log_weights().size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = st.prob(static_cast<int>(i));
  return p;
}

LocalSmoothnessParams LocalSmoothnessParams::make(const SparseMatrix& a, RegMode mode, double alpha, double s) {
  LocalSmoothnessParams p;
  p.mode = mode;
  p.alpha = alpha;
  p.s = s;
  p.diag_scale = a.rows() * a.norm_inf();
  p.col_norm = a.col_max_abs();
  const int m = a.cols();
  p.reg_coef.resize(m);
  p.static_part.resize(m);
  for (int j = 0; j < m; ++j) {
    const double reg = mode == RegMode::l2 ? alpha / s : (p.diag_scale > 0 ? alpha * p.col_norm[j] / p.diag_scale : 0.0);
    p.reg_coef[j] = reg;
    p.static_part[j] = (8.0 / alpha) * p.col_norm[j] * 2.0 * reg + reg;
  }
  return p;
}

double LocalSmoothnessParams::mu() const { return mode == RegMode::l2 ? alpha / s : alpha / diag_scale; }

double LocalSmoothnessParams::regularizer(const std::vector<double>& x, const std::vector<double>& center) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - center[j];
    acc += reg_coef[j] * d * d;
  }
  return 0.5 * acc;
}

double col_dot_p(const SoftmaxState& st, int j) {
  const SparseMatrix& a = st.matrix();
  double acc = 0.0;
  for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e) acc += e->value * st.weight(e->index);
  return acc / st.partition();
}

double col_abs_dot_p(const SoftmaxState& st, int j) {
  const SparseMatrix& a = st.matrix();
  double acc = 0.0;
  for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e) acc += std::abs(e->value) * st.weight(e->index);
  return acc / st.partition();
}

double grad_coord(const SoftmaxState& st, int j, const std::vector<double>& center, const LocalSmoothnessParams& prm) {
  return col_dot_p(st, j) + prm.reg_coef[j] * (st.x()[j] - center[j]);
}

double local_smoothness(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm) {
  return (8.0 / prm.alpha) * prm.col_norm[j] * col_abs_dot_p(st, j) + prm.static_part[j];
}

double sampling_weight(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm) {
  if (prm.mode == RegMode::l2) return local_smoothness(st, j, prm);
  if (prm.col_norm[j] == 0.0) return 0.0;
  return (8.0 / prm.alpha) * col_abs_dot_p(st, j) + prm.static_part[j] / prm.col_norm[j];
}

double hessian_diag(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm) {
  const SparseMatrix& a = st.matrix();
  double second = 0.0, first = 0.0;
  for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e) {
    const double p = st.prob(e->index);
    second += e->value * e->value * p;
    first += e->value * p;
  }
  return (second - first * first) / prm.alpha + prm.reg_coef[j];
}

void apply_coord_update(SoftmaxState& st, int j, double delta) { st.update(j, delta); }

double subproblem_value(const SoftmaxState& st, const std::vector<double>& center, const LocalSmoothnessParams& prm) {
  return smax_eval(st) + prm.regularizer(st.x(), center);
}

std::vector<double> SmaxObjective::residual(const std::vector<double>& x) const {
  std::vector<double> r = a_->multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs_[i];
  return r;
}

double SmaxObjective::value(const std::vector<double>& x) const { return smax_of(residual(x), alpha_); }

std::vector<double> SmaxObjective::gradient(const std::vector<double>& x) const {
  return a_->multiply_transpose(softmax_of(residual(x), alpha_));
}

std::vector<double> SmaxObjective::hessian_diag(const std::vector<double>& x) const {
  const std::vector<double> p = softmax_of(residual(x), alpha_);
  std::vector<double> h(a_->cols());
  for (int j = 0; j < a_->cols(); ++j) {
    double second = 0.0, first = 0.0;
    for (const Entry* e = a_->col_begin(j); e != a_->col_end(j); ++e) {
      second += e->value * e->value * p[e->index];
      first += e->value * p[e->index];
    }
    h[j] = (second - first * first) / alpha_;
  }
  return h;
}

std::vector<double> SmaxObjective::coordinate_smoothness() const {
  // Hessian_jj <= (1/alpha) sum_i A_ij^2 p_i <= ||a_j||_inf^2 / alpha.
  std::vector<double> l(a_->cols());
  for (int j = 0; j < a_->cols(); ++j) l[j] = a_->col_max_abs(j) * a_->col_max_abs(j) / alpha_;
  return l;
}

}  // namespace linf
