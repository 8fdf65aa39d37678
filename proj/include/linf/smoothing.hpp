#pragma once
#include <cstdint>
#include <vector>

#include "linf/sparse.hpp"

namespace linf {

// Log-weights w = (Ax - b)/alpha kept with a stored shift so that
// p_i = exp(w_i - shift)/z. Coordinate updates touch only the rows of one column.
class SoftmaxState {
 public:
  SoftmaxState(const SparseMatrix& a, std::vector<double> rhs, double alpha, std::vector<double> x);

  const SparseMatrix& matrix() const { return *a_; }
  const std::vector<double>& rhs() const { return rhs_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& log_weights() const { return w_; }
  double shift() const { return shift_; }
  double partition() const { return z_; }

  // exp(w_i - shift); divide by partition() for the probability.
  double weight(int i) const;
  double prob(int i) const { return weight(i) / z_; }
  double log_partition() const;
  std::uint64_t version() const { return version_; }
  std::uint64_t rebuilds() const { return rebuilds_; }

  // Moves x_j by delta. Returns true when the shift was reset by a full rebuild.
  bool update(int j, double delta);
  void rebuild();

 private:
  const SparseMatrix* a_;
  std::vector<double> rhs_;
  double alpha_;
  std::vector<double> x_;
  std::vector<double> w_;
  double shift_ = 0.0;
  double z_ = 0.0;
  double z_err_ = 0.0;  // running bound on rounding error in z_
  std::uint64_t version_ = 0;
  std::uint64_t rebuilds_ = 0;
};

// alpha * log sum exp((Ax - b)/alpha)
double smax_eval(const SoftmaxState& st);
std::vector<double> softmax_distribution(const SoftmaxState& st);
// Dense helpers on a residual vector.
double smax_of(const std::vector<double>& residual, double alpha);
std::vector<double> softmax_of(const std::vector<double>& residual, double alpha);
double log_sum_exp(const std::vector<double>& v);

enum class RegMode { l2, diagonal };

// Regularizer of the prox subproblem and the quantities built from it.
//   l2:       (alpha/2s) ||x - center||^2
//   diagonal: (alpha/(2 n ||A||)) sum_j ||a_j|| (x_j - center_j)^2
struct LocalSmoothnessParams {
  RegMode mode = RegMode::l2;
  double alpha = 1.0;
  double s = 1.0;           // l2 mode
  double diag_scale = 1.0;  // n ||A||_inf, diagonal mode
  std::vector<double> col_norm;
  // Per column: curvature of the regularizer, and the p-independent part of L_j.
  std::vector<double> reg_coef;
  std::vector<double> static_part;

  static LocalSmoothnessParams make(const SparseMatrix& a, RegMode mode, double alpha, double s);
  // Strong convexity modulus in the mode's own norm.
  double mu() const;
  // Weight in the mode's norm: 1 in l2 mode, ||a_j|| in diagonal mode.
  double norm_weight(int j) const { return mode == RegMode::l2 ? 1.0 : col_norm[j]; }
  double regularizer(const std::vector<double>& x, const std::vector<double>& center) const;
};

// <a_j, p> and <|a_j|, p> from the current state.
double col_dot_p(const SoftmaxState& st, int j);
double col_abs_dot_p(const SoftmaxState& st, int j);

double grad_coord(const SoftmaxState& st, int j, const std::vector<double>& center, const LocalSmoothnessParams& prm);
// L_j(x) = (8/alpha)||a_j||(<|a_j|, p> + 2 reg_j) + reg_j
double local_smoothness(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm);
// Sampling weight: L_j in l2 mode, L_j/||a_j|| in diagonal mode (0 for empty columns).
double sampling_weight(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm);
// Exact second derivative of the subproblem objective along e_j.
double hessian_diag(const SoftmaxState& st, int j, const LocalSmoothnessParams& prm);
void apply_coord_update(SoftmaxState& st, int j, double delta);

// smax_alpha(Ax - b) + regularizer
double subproblem_value(const SoftmaxState& st, const std::vector<double>& center, const LocalSmoothnessParams& prm);

// f(x) = smax_alpha(Ax - b) evaluated densely; shared by the baselines and tests.
class SmaxObjective {
 public:
  SmaxObjective(const SparseMatrix& a, std::vector<double> rhs, double alpha)
      : a_(&a), rhs_(std::move(rhs)), alpha_(alpha) {}
  const SparseMatrix& matrix() const { return *a_; }
  const std::vector<double>& rhs() const { return rhs_; }
  double alpha() const { return alpha_; }
  std::vector<double> residual(const std::vector<double>& x) const;
  double value(const std::vector<double>& x) const;
  std::vector<double> gradient(const std::vector<double>& x) const;
  // Diagonal of the Hessian.
  std::vector<double> hessian_diag(const std::vector<double>& x) const;
  // ||A||_inf^2 / alpha: smoothness in the l_inf norm.
  double linf_smoothness() const { return a_->norm_inf() * a_->norm_inf() / alpha_; }
  // ||a_j||_inf^2 / alpha: global coordinate smoothness.
  std::vector<double> coordinate_smoothness() const;

 private:
  const SparseMatrix* a_;
  std::vector<double> rhs_;
  double alpha_;
};

}  // namespace linf
