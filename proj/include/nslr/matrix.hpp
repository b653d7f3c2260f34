#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nslr/errors.hpp"

namespace nslr {

// Ordered index set T over columns {0, ..., p-1}; the complement is written
// T-bar throughout. Indices are 0-based internally and 1-based only in file
// formats and logs.
struct SupportSet {
  std::vector<std::size_t> indices;  // strictly increasing

  SupportSet() = default;
  explicit SupportSet(std::vector<std::size_t> idx) : indices(std::move(idx)) {}

  // Validates strict ascending order and range before adopting the indices.
  static SupportSet checked(std::vector<std::size_t> idx, std::size_t p);

  std::size_t size() const { return indices.size(); }
  bool contains(std::size_t j) const;
  std::vector<std::size_t> complement(std::size_t p) const;
};

// Design matrix, n samples by p features. Dense rows for synthetic data,
// compressed sparse rows for LIBSVM data. Everything the solvers touch goes
// through matvec / transposed matvec / column gathers, so no caller ever
// needs a p-by-p intermediate.
class Matrix {
 public:
  enum class Storage { dense, sparse };

  static Matrix dense(std::size_t n, std::size_t p, std::vector<double> values);
  static Matrix csr(std::size_t n, std::size_t p,
                    std::vector<std::size_t> row_offsets,
                    std::vector<std::size_t> col_indices,
                    std::vector<double> values);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  Storage storage() const { return storage_; }
  bool is_sparse() const { return storage_ == Storage::sparse; }
  std::size_t nnz() const { return values_.size(); }
  bool all_finite() const;

  // Element access; O(log nnz_row) for sparse. Meant for small-scale and
  // verification code, not kernels.
  double at(std::size_t i, std::size_t j) const;

  // out = X z
  void matvec(std::span<const double> z, std::span<double> out) const;
  // out = X^T w
  void matvec_transpose(std::span<const double> w, std::span<double> out) const;
  // out = X z where supp(z) is known to lie inside `support` (sorted).
  // Dense cost O(n |support|) instead of O(n p).
  void matvec_support(std::span<const double> z,
                      std::span<const std::size_t> support,
                      std::span<double> out) const;

  // Column-major gather of the columns in T into out (n x |T|).
  void gather_columns(const SupportSet& T, std::vector<double>& out) const;

  std::vector<double> row_l1_norms() const;
  double max_row_l1() const;

  // Raw storage views for kernels that want to branch on layout.
  std::span<const double> dense_values() const;
  std::span<const std::size_t> csr_row_offsets() const;
  std::span<const std::size_t> csr_col_indices() const;
  std::span<const double> csr_values() const;

 private:
  Matrix() = default;

  Storage storage_ = Storage::dense;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
  std::vector<std::size_t> row_offsets_;  // sparse only, size n+1
  std::vector<std::size_t> col_indices_;  // sparse only, size nnz
};

// Immutable sample set: X, binary labels y in {0,1}, and the signed labels
// c = 2y - 1 kept alongside because the linear-regression bound uses them.
struct Dataset {
  Matrix X;
  std::vector<double> y;
  std::vector<double> c;

  static Dataset make(Matrix X, std::vector<double> y);

  std::size_t n() const { return X.rows(); }
  std::size_t p() const { return X.cols(); }
};

}  // namespace nslr
