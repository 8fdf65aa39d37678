#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "linf/instance.hpp"
#include "linf/mirror_prox.hpp"
#include "linf/rng.hpp"
#include "linf/sparse.hpp"

namespace linf {

// R with ||Rd||_inf <= OPT(d) <= quality() * ||Rd||_inf for every demand d.
class CongestionApproximator {
 public:
  virtual ~CongestionApproximator() = default;
  virtual double quality() const = 0;
  virtual int rows() const = 0;
  virtual std::vector<double> apply(const std::vector<double>& d) const = 0;
  // 2 alpha R B U, one column per edge.
  virtual SparseMatrix regression_matrix() const = 0;
  // Exact routing of d on some fixed structure, used for the final residual.
  virtual std::vector<double> route_exact(const std::vector<double>& d) const = 0;
};

enum class QualityPolicy {
  certified,   // max over tree edges of cut capacity / tree edge capacity
  edge_count,  // m
};

// Maximum-capacity spanning tree; one row per tree edge holding the cut-side indicator over the cut capacity.
class TreeApproximator : public CongestionApproximator {
 public:
  TreeApproximator(const FlowNetwork& net, QualityPolicy policy = QualityPolicy::certified);

  double quality() const override { return alpha_; }
  int rows() const override { return static_cast<int>(order_.size()) - 1; }
  std::vector<double> apply(const std::vector<double>& d) const override;
  SparseMatrix regression_matrix() const override;
  std::vector<double> route_exact(const std::vector<double>& d) const override;

  double certified_quality() const { return certified_; }
  // Tree edge id of the row for vertex v (v != root), -1 at the root.
  int row_of(int v) const { return row_[v]; }
  double cut_capacity(int row) const { return cut_cap_[row]; }
  const std::vector<int>& tree_edges() const { return tree_edge_; }

 private:
  void build_from(const FlowNetwork& net, const std::vector<std::vector<std::pair<int, int>>>& adj, int root);
  // Subtree sums of d, indexed by vertex.
  std::vector<double> subtree_sums(const std::vector<double>& d) const;
  // Calls visit(row, sign) for every tree edge on the path between the endpoints of edge e.
  template <class F>
  void walk(int e, F&& visit) const;

  const FlowNetwork* net_;
  std::vector<int> parent_, parent_edge_, depth_, order_, row_;
  std::vector<int> tree_edge_;   // graph edge per row
  std::vector<int> row_vertex_;  // child vertex per row
  std::vector<double> cut_cap_;
  double alpha_ = 1.0;
  double certified_ = 1.0;
};

enum class RouteSolver { cd_l2, cd_diagonal, mirror_prox };
RouteSolver parse_route_solver(const std::string& name);
std::string route_solver_name(RouteSolver s);

struct RouteOptions {
  RouteSolver solver = RouteSolver::cd_diagonal;
  double tau = 1e-6;          // mirror prox maintainer threshold
  double sparsity = 0.0;      // 0: number of edges
  MirrorProxOptions mirror;   // backend and boosting for the mirror prox path
  // Leave the residual recursion once tree routing the residual fits in the eps budget,
  // instead of always running all ceil(log2 2m) rounds.
  bool early_exit = false;
};

struct AlmostRouteResult {
  std::vector<double> flow;  // U x
  double radius = 0.0;       // accepted r, so |U^-1 f|_inf <= r
  double composite = 0.0;    // 2 alpha |R(d - Bf)|_inf + |U^-1 f|_inf
  int solves = 0;
  long inner_iterations = 0;
};

// Binary search on r over a doubling grid then a (1 + eps/4) grid; each probe solves
// min_{|x|_inf <= r} |Ax - b|_inf with A = 2 alpha RBU, b = 2 alpha Rd.
AlmostRouteResult almost_route(const FlowNetwork& net, const std::vector<double>& d, const CongestionApproximator& approx,
                               double eps, Rng& rng, const RouteOptions& opt = {});

struct RoundLog {
  int round;
  double accuracy;        // eps_k
  double residual_before;  // |R d^k|_inf
  double residual_after;   // |R d^{k+1}|_inf
  double radius;
  bool contracted;         // residual_after <= accuracy * residual_before (+ roundoff)
};

struct FlowToRegressResult {
  FlowSolution solution;  // Bf = d
  std::vector<RoundLog> rounds;
  double alpha = 1.0;
  long inner_iterations = 0;
};

// First round at eps, then ceil(log2 2m) rounds at 1/2, then exact tree routing of what is left.
FlowToRegressResult flow_to_regress(const FlowNetwork& net, const std::vector<double>& d, double eps, Rng& rng,
                                    const RouteOptions& opt = {}, QualityPolicy policy = QualityPolicy::certified);

struct ApproxMaxflowResult {
  FlowSolution solution;  // feasible s-t flow; value is its size
  std::vector<RoundLog> rounds;
  double congestion_unit = 0.0;  // congestion of the unit-demand routing
};

// Routes one unit s-t with near-minimum congestion c and scales by 1/c.
// Throws Infeasible when the sink is not connected to the source.
ApproxMaxflowResult approx_maxflow(const FlowNetwork& net, double eps, Rng& rng, const RouteOptions& opt = {});

struct IntegralFlowState {
  std::vector<double> flow;  // integral, edge orientation as in the network
  double value = 0.0;
  int augmentations = 0;
  bool maximal = false;
};

// Cycle cancelling on the fractional support plus a virtual t->s edge; returns value floor(F).
IntegralFlowState round_to_integral(const FlowNetwork& net, const std::vector<double>& flow);

// One BFS augmenting path per round; rounds < 0 means until maximal.
IntegralFlowState augment_to_max(const FlowNetwork& net, IntegralFlowState state, int rounds = -1);

struct DirectedReduction {
  FlowNetwork undirected;    // three half-capacity edges per arc: (s,v), (v,u), (u,t)
  std::vector<double> f_init;  // 1/2 along each of them
  int arcs = 0;
  // Keeps the s-t path part of f_final - f_init and maps it back to arc flows.
  std::vector<double> recover(const std::vector<double>& f_final) const;
};
DirectedReduction directed_reduce(const FlowNetwork& net);

enum class FlowMode { undirected, directed };

struct ExactFlowResult {
  IntegralFlowState state;
  double epsilon = 0.0;
  double approx_value = 0.0;  // value before rounding
  int rounded_value = 0;
  std::vector<RoundLog> rounds;
  double init_distance_sq = 0.0;  // |f_init - f_max|^2 in the reduced graph (directed mode)
};

// eps = n^{1/4} / m^{3/4}, clamped to [0.02, 0.5].
double exact_flow_epsilon(int n, int m);
ExactFlowResult exact_unit_maxflow(const FlowNetwork& net, FlowMode mode, Rng& rng, const RouteOptions& opt = {},
                                   double eps = 0.0);

// Blocking-flow max flow; undirected edges carry capacity both ways.
FlowSolution dinic(const FlowNetwork& net);

}  // namespace linf
