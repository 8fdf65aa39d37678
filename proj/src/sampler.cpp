#include "linf/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "linf/errors.hpp"

namespace linf {

SumTree::SumTree(int n) : n_(n) {
  while (cap_ < n_) cap_ <<= 1;
  node_.assign(2 * cap_, 0.0);
}

void SumTree::update(int i, double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("SumTree: weight must be finite and non-negative");
  int k = cap_ + i;
  node_[k] = w;
  ++touched_;
  // Recompute parents from their children so no drift accumulates.
  for (k >>= 1; k >= 1; k >>= 1) {
    node_[k] = node_[2 * k] + node_[2 * k + 1];
    ++touched_;
  }
}

void SumTree::assign(const std::vector<double>& w) {
  for (int i = 0; i < n_; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw std::invalid_argument("SumTree: weight must be finite and non-negative");
    node_[cap_ + i] = w[i];
  }
  for (int k = cap_ - 1; k >= 1; --k) node_[k] = node_[2 * k] + node_[2 * k + 1];
  touched_ += 2 * cap_;
}

int SumTree::sample(Rng& rng) const {
  if (!(total() > 0.0)) throw std::invalid_argument("SumTree: cannot sample from zero total");
  int k = 1;
  while (k < cap_) {
    const double l = node_[2 * k], r = node_[2 * k + 1];
    k = (rng.uniform() * (l + r) < l || r == 0.0) ? 2 * k : 2 * k + 1;
  }
  // A zero-weight leaf can only be reached through rounding; walk to a live neighbour.
  int i = k - cap_;
  if (node_[k] == 0.0) {
    for (int d = 1; d < cap_; ++d) {
      if (i - d >= 0 && node_[cap_ + i - d] > 0.0) return i - d;
      if (i + d < n_ && node_[cap_ + i + d] > 0.0) return i + d;
    }
  }
  return i;
}

void tree_update(SumTree& t, int i, double w) { t.update(i, w); }
int tree_sample(const SumTree& t, Rng& rng) { return t.sample(rng); }

AliasTable::AliasTable(const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  total_ = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("AliasTable: weight must be finite and non-negative");
    total_ += w;
  }
  if (n == 0 || !(total_ > 0.0)) {
    prob_.clear();
    alias_.clear();
    return;
  }
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (int i = 0; i < n; ++i) {
    scaled[i] = weights[i] * n / total_;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[i] = 1.0, alias_[i] = i;
  // Leftovers here are rounding residue of cells that should be full.
  for (int i : small) prob_[i] = weights[i] > 0.0 ? 1.0 : 0.0, alias_[i] = i;
}

int AliasTable::sample(Rng& rng) const {
  if (prob_.empty()) throw std::invalid_argument("AliasTable: empty distribution");
  const int n = static_cast<int>(prob_.size());
  const double u = rng.uniform() * n;
  int cell = static_cast<int>(u);
  if (cell >= n) cell = n - 1;
  return (u - cell) < prob_[cell] ? cell : alias_[cell];
}

MixtureSampler::MixtureSampler(const SoftmaxState& st, const std::vector<double>& static_weights,
                               const std::vector<double>& col_scale)
    : coef_(8.0 / st.alpha()), static_(static_weights), rows_(st.matrix().rows()) {
  const SparseMatrix& a = st.matrix();
  row_sum_.assign(a.rows(), 0.0);
  row_alias_.resize(a.rows());
  row_cols_.resize(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    std::vector<double> w;
    for (const Entry* e = a.row_begin(i); e != a.row_end(i); ++e) {
      const double r = std::abs(e->value) * col_scale[e->index];
      if (r <= 0.0) continue;
      w.push_back(r);
      row_cols_[i].push_back(e->index);
      row_sum_[i] += r;
    }
    if (!w.empty()) row_alias_[i] = AliasTable(w);
  }
  resync(st);
}

void MixtureSampler::resync(const SoftmaxState& st) {
  std::vector<double> leaf(row_sum_.size());
  for (std::size_t i = 0; i < leaf.size(); ++i) leaf[i] = row_sum_[i] > 0.0 ? st.weight(static_cast<int>(i)) * row_sum_[i] : 0.0;
  rows_.assign(leaf);
  synced_ = st.version();
}

void MixtureSampler::on_update(const SoftmaxState& st, int j, bool rebuilt) {
  if (rebuilt) {
    resync(st);
    return;
  }
  const SparseMatrix& a = st.matrix();
  for (const Entry* e = a.col_begin(j); e != a.col_end(j); ++e)
    if (row_sum_[e->index] > 0.0) rows_.update(e->index, st.weight(e->index) * row_sum_[e->index]);
  synced_ = st.version();
}

double MixtureSampler::dynamic_mass(const SoftmaxState& st) const { return coef_ * rows_.total() / st.partition(); }

int MixtureSampler::sample(const SoftmaxState& st, Rng& rng) const {
  if (st.version() != synced_) throw SolverFault("MixtureSampler: stale masses (state version mismatch)");
  const double s = static_mass(), d = dynamic_mass(st);
  if (!(s + d > 0.0)) throw SolverFault("MixtureSampler: zero total mass");
  if (rng.uniform() * (s + d) < s) return static_.sample(rng);
  const int i = rows_.sample(rng);
  return row_cols_[i][row_alias_[i].sample(rng)];
}

}  // namespace linf
