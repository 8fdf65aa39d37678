#pragma once
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "linf/sparse.hpp"

namespace linf {

// min over ||x - center||_inf <= radius of ||Ax - b||_inf, solved to additive epsilon.
struct RegressionInstance {
  SparseMatrix matrix;
  std::vector<double> rhs;
  double radius = 1.0;
  double epsilon = 0.1;
  double sparsity = 0.0;  // estimate of ||x*||_2^2; 0 means "use the column count"
  std::optional<double> alpha_override;

  double effective_sparsity() const { return sparsity > 0.0 ? sparsity : static_cast<double>(matrix.cols()); }
};

struct UnitBoxReduction {
  RegressionInstance unit;
  std::vector<double> center;
  double radius;
  std::vector<double> to_original(const std::vector<double>& unit_x) const;
  std::vector<double> to_unit(const std::vector<double>& x) const;
};

// x = center + radius * x~; the unit instance has rhs (b - A center)/radius and accuracy eps/radius.
UnitBoxReduction reduce_to_unit_box(const RegressionInstance& inst, const std::vector<double>& center);

struct Edge {
  int tail;
  int head;
  double capacity;
};

struct FlowNetwork {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<double> demand;  // net inflow required at each vertex; sums to zero
  bool directed = false;
  int source = -1;
  int sink = -1;

  int m() const { return static_cast<int>(edges.size()); }
  // Adds an edge; undirected edges are stored with tail < head.
  void add_edge(int u, int v, double capacity);
  // Throws std::invalid_argument when the demand does not sum to zero or the graph is disconnected.
  void validate() const;
  bool connected() const;
  // e_sink - e_source scaled by value.
  std::vector<double> st_demand(double value = 1.0) const;
};

struct FlowSolution {
  std::vector<double> flow;
  std::vector<double> congestion;
  std::vector<double> achieved;
  double value = 0.0;

  double max_congestion() const { return norm_inf(congestion); }
};

// Bf with -1 at the tail and +1 at the head of every edge.
std::vector<double> incidence_apply(const FlowNetwork& net, const std::vector<double>& f);
// B^T phi: phi(head) - phi(tail) per edge.
std::vector<double> incidence_transpose_apply(const FlowNetwork& net, const std::vector<double>& phi);
FlowSolution make_flow_solution(const FlowNetwork& net, std::vector<double> f, double value);

// Text formats. Readers throw ParseError with a 1-based line and column.
struct MatrixFile {
  SparseMatrix matrix;
  std::vector<double> rhs;
};
MatrixFile read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const SparseMatrix& a, const std::vector<double>& rhs);
FlowNetwork read_dimacs(std::istream& in);
void write_dimacs(std::ostream& out, const FlowNetwork& net);
void write_flow(std::ostream& out, const FlowNetwork& net, const FlowSolution& sol);

}  // namespace linf
