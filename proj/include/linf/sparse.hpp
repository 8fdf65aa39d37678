#pragma once
#include <cstddef>
#include <vector>

namespace linf {

struct Triplet {
  int row;
  int col;
  double value;
};

struct Entry {
  int index;  // row index in a column view, column index in a row view
  double value;
};

// Immutable sparse matrix with both column and row views and cached norms.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  std::size_t nnz() const { return col_entries_.size(); }

  // Entries of column j, sorted by row.
  const Entry* col_begin(int j) const { return col_entries_.data() + col_start_[j]; }
  const Entry* col_end(int j) const { return col_entries_.data() + col_start_[j + 1]; }
  int col_size(int j) const { return col_start_[j + 1] - col_start_[j]; }
  // Entries of row i, sorted by column.
  const Entry* row_begin(int i) const { return row_entries_.data() + row_start_[i]; }
  const Entry* row_end(int i) const { return row_entries_.data() + row_start_[i + 1]; }
  int row_size(int i) const { return row_start_[i + 1] - row_start_[i]; }

  double col_max_abs(int j) const { return col_max_abs_[j]; }
  double row_l1(int i) const { return row_l1_[i]; }
  const std::vector<double>& col_max_abs() const { return col_max_abs_; }
  const std::vector<double>& row_l1() const { return row_l1_; }
  // Largest row l1 norm.
  double norm_inf() const { return norm_inf_; }
  // Largest number of nonzeros in a column.
  int col_sparsity() const { return col_sparsity_; }

  std::vector<double> multiply(const std::vector<double>& x) const;
  std::vector<double> multiply_transpose(const std::vector<double>& y) const;
  std::vector<Triplet> triplets_by_col() const;
  std::vector<Triplet> triplets_by_row() const;

  friend SparseMatrix build_from_triplets(std::vector<Triplet> triplets, int n_rows, int n_cols);

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> col_start_{0};
  std::vector<Entry> col_entries_;
  std::vector<int> row_start_{0};
  std::vector<Entry> row_entries_;
  std::vector<double> col_max_abs_;
  std::vector<double> row_l1_;
  double norm_inf_ = 0.0;
  int col_sparsity_ = 0;
};

// Throws std::invalid_argument on out-of-range indices or duplicate (row, col) pairs.
// Explicit zeros are dropped.
SparseMatrix build_from_triplets(std::vector<Triplet> triplets, int n_rows, int n_cols);

// [A; -A] and (b, -b): max of (A'x - b') equals ||Ax - b||_inf.
struct SignDoubled {
  SparseMatrix matrix;
  std::vector<double> rhs;
};
SignDoubled sign_double(const SparseMatrix& a, const std::vector<double>& b);

double norm_inf(const std::vector<double>& v);
// ||Ax - b||_inf
double residual_inf(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b);

}  // namespace linf
