#pragma once
#include <cstdint>
#include <vector>

#include "linf/rng.hpp"
#include "linf/smoothing.hpp"

namespace linf {

// Complete binary tree in an implicit array; leaves hold weights, internal nodes subtree sums.
class SumTree {
 public:
  explicit SumTree(int n = 0);
  int size() const { return n_; }
  double total() const { return node_.empty() ? 0.0 : node_[1]; }
  double weight(int i) const { return node_[cap_ + i]; }
  // Throws std::invalid_argument for negative or non-finite weights.
  void update(int i, double w);
  // Replaces every leaf and rebuilds the sums bottom-up in O(n).
  void assign(const std::vector<double>& w);
  // Top-down descent, one uniform per level. Throws when the total is zero.
  int sample(Rng& rng) const;
  std::uint64_t touched() const { return touched_; }

 private:
  int n_ = 0;
  int cap_ = 1;
  std::vector<double> node_;
  std::uint64_t touched_ = 0;
};

void tree_update(SumTree& t, int i, double w);
int tree_sample(const SumTree& t, Rng& rng);

// Walker alias table over a fixed distribution.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);
  int sample(Rng& rng) const;
  double total() const { return total_; }
  bool empty() const { return prob_.empty(); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
  double total_ = 0.0;
};

// Samples column j with probability proportional to
//   static_j + (8/alpha) sum_i p_i |A_ij| col_scale_j.
// The dynamic half goes row-first through a sum tree over p_i * rowsum_i, then a per-row alias.
class MixtureSampler {
 public:
  MixtureSampler(const SoftmaxState& st, const std::vector<double>& static_weights, const std::vector<double>& col_scale);

  // Call after every state update of column j (rebuilt = the state reset its shift).
  void on_update(const SoftmaxState& st, int j, bool rebuilt);
  void resync(const SoftmaxState& st);
  // Throws SolverFault if the state moved since the last sync.
  int sample(const SoftmaxState& st, Rng& rng) const;

  double static_mass() const { return static_.total(); }
  double dynamic_mass(const SoftmaxState& st) const;
  double total_mass(const SoftmaxState& st) const { return static_mass() + dynamic_mass(st); }
  std::uint64_t touched() const { return rows_.touched(); }

 private:
  double coef_;  // 8/alpha
  std::vector<double> row_sum_;
  std::vector<AliasTable> row_alias_;
  std::vector<std::vector<int>> row_cols_;
  AliasTable static_;
  SumTree rows_;
  std::uint64_t synced_ = 0;
};

}  // namespace linf
