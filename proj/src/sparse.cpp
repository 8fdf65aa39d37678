#include "linf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace linf {

SparseMatrix build_from_triplets(std::vector<Triplet> triplets, int n_rows, int n_cols) {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative matrix dimension");
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw std::invalid_argument("triplet index out of range: (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ")");
    if (!std::isfinite(t.value)) throw std::invalid_argument("non-finite matrix entry");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  for (std::size_t k = 1; k < triplets.size(); ++k)
    if (triplets[k].row == triplets[k - 1].row && triplets[k].col == triplets[k - 1].col)
      throw std::invalid_argument("duplicate triplet: (" + std::to_string(triplets[k].row) + ", " +
                                  std::to_string(triplets[k].col) + ")");
  std::erase_if(triplets, [](const Triplet& t) { return t.value == 0.0; });

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.col_start_.assign(n_cols + 1, 0);
  m.row_start_.assign(n_rows + 1, 0);
  m.col_max_abs_.assign(n_cols, 0.0);
  m.row_l1_.assign(n_rows, 0.0);
  for (const auto& t : triplets) {
    ++m.col_start_[t.col + 1];
    ++m.row_start_[t.row + 1];
  }
  for (int j = 0; j < n_cols; ++j) m.col_start_[j + 1] += m.col_start_[j];
  for (int i = 0; i < n_rows; ++i) m.row_start_[i + 1] += m.row_start_[i];
  m.col_entries_.resize(triplets.size());
  m.row_entries_.resize(triplets.size());
  std::vector<int> row_fill(m.row_start_.begin(), m.row_start_.end() - 1);
  // Column-major order also leaves each row's entries sorted by column.
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    m.col_entries_[k] = {t.row, t.value};
    m.row_entries_[row_fill[t.row]++] = {t.col, t.value};
    m.col_max_abs_[t.col] = std::max(m.col_max_abs_[t.col], std::abs(t.value));
    m.row_l1_[t.row] += std::abs(t.value);
  }
  for (int i = 0; i < n_rows; ++i) m.norm_inf_ = std::max(m.norm_inf_, m.row_l1_[i]);
  for (int j = 0; j < n_cols; ++j) m.col_sparsity_ = std::max(m.col_sparsity_, m.col_size(j));
  return m;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_cols_) throw std::invalid_argument("multiply: length mismatch");
  std::vector<double> y(n_rows_, 0.0);
  for (int j = 0; j < n_cols_; ++j) {
    if (x[j] == 0.0) continue;
    for (const Entry* e = col_begin(j); e != col_end(j); ++e) y[e->index] += e->value * x[j];
  }
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(const std::vector<double>& y) const {
  if (static_cast<int>(y.size()) != n_rows_) throw std::invalid_argument("multiply_transpose: length mismatch");
  std::vector<double> x(n_cols_, 0.0);
  for (int j = 0; j < n_cols_; ++j) {
    double acc = 0.0;
    for (const Entry* e = col_begin(j); e != col_end(j); ++e) acc += e->value * y[e->index];
    x[j] = acc;
  }
  return x;
}

std::vector<Triplet> SparseMatrix::triplets_by_col() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (int j = 0; j < n_cols_; ++j)
    for (const Entry* e = col_begin(j); e != col_end(j); ++e) out.push_back({e->index, j, e->value});
  return out;
}

std::vector<Triplet> SparseMatrix::triplets_by_row() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (int i = 0; i < n_rows_; ++i)
    for (const Entry* e = row_begin(i); e != row_end(i); ++e) out.push_back({i, e->index, e->value});
  return out;
}

SignDoubled sign_double(const SparseMatrix& a, const std::vector<double>& b) {
  if (static_cast<int>(b.size()) != a.rows()) throw std::invalid_argument("sign_double: rhs length mismatch");
  const int n = a.rows();
  std::vector<Triplet> t = a.triplets_by_col();
  const std::size_t k = t.size();
  t.reserve(2 * k);
  for (std::size_t e = 0; e < k; ++e) t.push_back({t[e].row + n, t[e].col, -t[e].value});
  SignDoubled out{build_from_triplets(std::move(t), 2 * n, a.cols()), std::vector<double>(2 * n)};
  for (int i = 0; i < n; ++i) {
    out.rhs[i] = b[i];
    out.rhs[i + n] = -b[i];
  }
  return out;
}

double norm_inf(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

double residual_inf(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  std::vector<double> r = a.multiply(x);
  double best = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) best = std::max(best, std::abs(r[i] - b[i]));
  return best;
}

}  // namespace linf
