#pragma once
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "linf/instance.hpp"
#include "linf/rng.hpp"
#include "linf/sampler.hpp"
#include "linf/smoothing.hpp"

namespace linf {

// One coordinate-descent run on
//   h(x) = smax_alpha(Ax - rhs) + regularizer(x - center),  x in [-1, 1]^m.
class CdIterate {
 public:
  CdIterate(const SparseMatrix& a, std::vector<double> rhs, std::vector<double> center,
            const LocalSmoothnessParams& prm, std::vector<double> x0);

  const std::vector<double>& x() const { return state_.x(); }
  const std::vector<double>& center() const { return center_; }
  const SoftmaxState& state() const { return state_; }
  const LocalSmoothnessParams& params() const { return *prm_; }
  const MixtureSampler& sampler() const { return sampler_; }

  double value() const { return subproblem_value(state_, center_, *prm_); }
  double grad(int j) const { return grad_coord(state_, j, center_, *prm_); }
  double smoothness(int j) const { return local_smoothness(state_, j, *prm_); }
  // Sum of the sampling weights, maintained incrementally.
  double total_weight() const { return sampler_.total_mass(state_); }
  // Upper bound on h(x) - h* from the minimum-norm projected gradient and strong convexity.
  double gap_certificate() const;

  int sample(Rng& rng) const { return sampler_.sample(state_, rng); }
  void move(int j, double delta);

 private:
  const LocalSmoothnessParams* prm_;
  std::vector<double> center_;
  SoftmaxState state_;
  MixtureSampler sampler_;
};

struct CdStep {
  int coord;
  double grad;
  double smoothness;
  double delta;
};

// Samples j by local smoothness (per the mode) and takes the clamped step x_j - grad/L_j.
CdStep lcd_step(CdIterate& it, Rng& rng);

// Theory quantities for the subproblem.
struct SubproblemBounds {
  double total_smoothness;  // S
  double mu;                // strong convexity in the mode's norm
  double range;             // bound on h(x0) - h*
  double min_norm_weight;   // smallest nonzero weight of the mode's norm
};
SubproblemBounds subproblem_bounds(const SparseMatrix& a, const LocalSmoothnessParams& prm);
// (2S/mu) log(range/(target_gap * fail)), target_gap turning into ||x - x*||_inf <= delta_x.
double subproblem_target_gap(const SubproblemBounds& b, double delta_x);
long subproblem_budget(const SubproblemBounds& b, double delta_x, double fail_prob);

struct SubproblemResult {
  std::vector<double> x;
  long iterations = 0;
  bool certified = false;  // gap certificate reached; otherwise the full budget ran
  double gap_bound = 0.0;
};

SubproblemResult solve_subproblem(const SparseMatrix& a, const std::vector<double>& rhs,
                                  const std::vector<double>& center, std::vector<double> warm,
                                  const LocalSmoothnessParams& prm, double delta_x, double fail_prob, Rng& rng,
                                  long max_iters = -1);

// log p' = log p + (Ax' - b)/alpha, renormalized.
std::vector<double> dual_response(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b,
                                  const std::vector<double>& log_p, double alpha);

// Sign-doubled problem data shared by all outer iterations.
struct ProxProblem {
  SparseMatrix matrix;  // [A; -A]
  std::vector<double> rhs;
  RegMode mode = RegMode::l2;
  double epsilon = 0.1;  // total target accuracy
  double s = 1.0;
  double alpha = 1.0;
  LocalSmoothnessParams params;
  SubproblemBounds bounds;
  double delta_x = 0.0;
  double fail_prob = 0.0;
  int outer_budget = 1;

  static ProxProblem make(const RegressionInstance& inst, RegMode mode);
};

struct ProxOuterState {
  std::vector<double> x;
  std::vector<double> log_p;
  int t = 0;

  static ProxOuterState initial(const ProxProblem& pb);
  std::vector<double> p() const;
};

struct ProxStep {
  long inner_iters = 0;
  bool certified = false;
};

ProxStep prox_outer_iterate(ProxOuterState& st, const ProxProblem& pb, Rng& rng);

// Lower bound max_p -||A'^T p||_1 - p^T b' for a distribution p over the doubled rows.
double dual_value(const SparseMatrix& a2, const std::vector<double>& b2, const std::vector<double>& p);

struct TranscriptRow {
  int outer_iter;
  long inner_iters;
  double objective;
  long long elapsed_ns;
  std::uint64_t seed;
};
std::string transcript_csv(const std::vector<TranscriptRow>& rows);

struct BoxSolveOptions {
  bool early_stop = true;  // stop once best primal - best dual <= epsilon
  double stop_below = -std::numeric_limits<double>::infinity();  // stop once a primal value <= this
  double stop_above = std::numeric_limits<double>::infinity();   // stop once the dual bound exceeds this
  int max_outer = 0;  // 0: theory budget
  bool timing = false;
};

struct BoxSolveResult {
  std::vector<double> x;
  double value = 0.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  int outer_iters = 0;
  long inner_iters = 0;
  double alpha = 0.0;
  std::vector<TranscriptRow> transcript;
};

// Unit box only; sign doubling happens inside.
BoxSolveResult solve_box_linf(const RegressionInstance& inst, RegMode mode, Rng& rng,
                              const BoxSolveOptions& opt = {});

}  // namespace linf
