#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linf/instance.hpp"
#include "linf/rng.hpp"
#include "linf/sampler.hpp"
#include "linf/simplex_maintainer.hpp"
#include "linf/sparse.hpp"

namespace linf {

// Randomized primal-dual coordinate mirror prox for
//   min_{x in [-1,1]^m} max_{y in simplex} y'(Ax - b) + (eps/2) |x|^2/(2s) - (eps/(4 log n)) sum y log y
// on the sign-doubled matrix, so n below counts doubled rows.
struct MirrorProxConfig {
  double epsilon = 0.1;
  double s = 1.0;
  int n = 0;
  int m = 0;
  double log_n = 0.0;
  double kappa = 0.0;
  long T = 1;  // iterations per phase
  int K = 1;   // phases
  double C = 1.0;            // sqrt(column sparsity), the sum bound on sqrt(L~)
  double C_kappa = 1.0;      // constant entering kappa; at least C and the largest row weight
  double contraction = 0.0;  // eps / (4 kappa log n)
  double entropy_weight = 0.0;  // eps / (4 log n)

  static MirrorProxConfig make(const SparseMatrix& a2, double epsilon, double s);
};

// Dense copy of the matrix-dependent sampling quantities.
struct ColumnWeights {
  std::vector<double> col_inf;      // |a_j|_inf
  std::vector<double> static_w;     // sqrt(eps |a_j|_inf)
  std::vector<double> row_total;    // sum_j sqrt(s |a_j|_inf |A_ij|)
  std::vector<AliasTable> row_alias;  // j | i proportional to sqrt(s |a_j|_inf |A_ij|)
  std::vector<int> empty_rows;      // a draw landing here falls back to a uniform column
  AliasTable static_alias;
  double static_total = 0.0;
  double heads = 0.5;  // C sqrt(ns) / (C sqrt(ns) + sqrt(mn eps))
  double s = 1.0;

  // Exact probability of column j given sqrt(y_i)/sum sqrt(y) per row and the mass on empty rows.
  double conditional(const SparseMatrix& a2, int j, const std::function<double(int)>& sqrt_y,
                     double empty_mass) const;
};

ColumnWeights make_column_weights(const SparseMatrix& a2, const MirrorProxConfig& cfg);

// L~_j(y) = (sqrt(s |a_j|_inf) sum_i sqrt(|A_ij| y_i) + sqrt(eps |a_j|_inf))^2 with y given densely.
double lj_tilde(const SparseMatrix& a2, const std::vector<double>& y, int j, double s, double epsilon);
// L_j(y) = s |a_j|_inf |a_j|'y + eps |a_j|_inf.
double lj_plain(const SparseMatrix& a2, const std::vector<double>& y, int j, double s, double epsilon);

// Exact sampling law at y (dense): half uniform, half the two-branch mixture.
std::vector<double> sampling_law(const SparseMatrix& a2, const ColumnWeights& w, const std::vector<double>& y);

enum class SimplexBackend { dense, maintainer };

struct IterationView {
  int phase;
  long iter;
  int sampled_j;
  double p_j;
  const std::vector<double>* x;
  const std::vector<double>* residual;  // b - Ax, doubled rows
};

struct MirrorProxOptions {
  SimplexBackend backend = SimplexBackend::maintainer;
  double tau = 1e-6;
  int boost_runs = 1;
  bool early_stop = true;  // stop once the phase output is certified within eps by duality
  int max_phases = 0;      // 0: the configured K
  long fixed_stop = 0;     // > 0 pins t* (tests)
  bool instrument = false;  // dense checks of the update bounds and multiplicative stability
  bool trace = false;
  long trace_every = 1;
  // Reference saddle point for the divergence column of the transcript.
  std::optional<std::pair<std::vector<double>, std::vector<double>>> reference;
  // Return true to stop the solve after this iteration.
  std::function<bool(const IterationView&)> on_iteration;
};

struct PhaseState {
  std::vector<double> x;  // in [-1, 1]^m
  std::vector<double> y;  // dense simplex point at the phase start (doubled rows)
  std::vector<double> v;  // log y up to an additive constant
};

struct PhaseStats {
  long iterations = 0;  // t* - 1
  long stop = 0;        // t*
  double max_delta = 0.0;       // largest |delta| entry seen (instrumented)
  double max_ratio = 0.0;       // largest y_{t+1/2}/y_t or y_{t+1}/y_t (instrumented)
  double max_lsum = 0.0;        // largest sum_j sqrt(L~_j) over visited y (instrumented)
  bool stopped_by_callback = false;
};

struct MirrorProxTraceRow {
  int phase;
  long iter;
  int sampled_j;
  double p_j;
  double objective_sample;
  double divergence;  // NaN when no reference is set
};

std::string mirror_prox_csv(const std::vector<MirrorProxTraceRow>& rows);

// Runs one phase from `in` and returns the aggregate point at the sampled stopping iteration.
class MirrorProxSolver {
 public:
  MirrorProxSolver(const SparseMatrix& a2, std::vector<double> b2, MirrorProxConfig cfg, MirrorProxOptions opt);

  PhaseState initial() const;
  PhaseState run_phase(const PhaseState& in, int phase, Rng& rng, PhaseStats* stats = nullptr);

  // Draws (j, p_j) from the oracle's current state.
  std::pair<int, double> sample_pj(Rng& rng);
  double divergence(const PhaseState& z, const std::vector<double>& x_ref, const std::vector<double>& y_ref) const;

  const MirrorProxConfig& config() const { return cfg_; }
  const ColumnWeights& weights() const { return w_; }
  const std::vector<MirrorProxTraceRow>& transcript() const { return trace_; }
  SimplexOracle& oracle() { return *y_; }

 private:
  void load(const PhaseState& in);
  double clamp_step(double xj, double grad, double p) const;
  void move_x(int j, double value);

  const SparseMatrix& a_;
  std::vector<double> b_;
  MirrorProxConfig cfg_;
  MirrorProxOptions opt_;
  ColumnWeights w_;
  std::unique_ptr<SimplexOracle> y_;
  std::vector<double> x_, resid_;
  std::vector<MirrorProxTraceRow> trace_;
};

struct FlowRegressResult {
  std::vector<double> x;
  double value = 0.0;        // |Ax - b|_inf on the caller's instance
  double lower_bound = 0.0;  // dual certificate
  int phases = 0;
  long iterations = 0;
  int runs = 1;
  bool sparsity_warning = false;  // |x|^2 > 2s
  MirrorProxConfig config;
  std::vector<MirrorProxTraceRow> transcript;
};

// Boosted solve: independent runs on split streams, best by direct evaluation.
FlowRegressResult solve_flow_regress(const RegressionInstance& inst, Rng& rng, const MirrorProxOptions& opt = {});

}  // namespace linf
