#include "nslr/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace nslr {

SupportSet SupportSet::checked(std::vector<std::size_t> idx, std::size_t p) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= p) throw argument_error("support index out of range");
    if (k > 0 && idx[k] <= idx[k - 1])
      throw argument_error("support indices must be strictly increasing");
  }
  return SupportSet(std::move(idx));
}

bool SupportSet::contains(std::size_t j) const {
  return std::binary_search(indices.begin(), indices.end(), j);
}

std::vector<std::size_t> SupportSet::complement(std::size_t p) const {
  std::vector<std::size_t> out;
  out.reserve(p - indices.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (k < indices.size() && indices[k] == j) {
      ++k;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

Matrix Matrix::dense(std::size_t n, std::size_t p, std::vector<double> values) {
  if (values.size() != n * p)
    throw argument_error("dense matrix: values size != n*p");
  Matrix m;
  m.storage_ = Storage::dense;
  m.n_ = n;
  m.p_ = p;
  m.values_ = std::move(values);
  return m;
}

Matrix Matrix::csr(std::size_t n, std::size_t p,
                   std::vector<std::size_t> row_offsets,
                   std::vector<std::size_t> col_indices,
                   std::vector<double> values) {
  if (row_offsets.size() != n + 1)
    throw argument_error("csr matrix: row_offsets size != n+1");
  if (col_indices.size() != values.size())
    throw argument_error("csr matrix: col_indices/values size mismatch");
  if (row_offsets.front() != 0 || row_offsets.back() != values.size())
    throw argument_error("csr matrix: bad row offsets");
  for (std::size_t i = 0; i < n; ++i) {
    if (row_offsets[i] > row_offsets[i + 1])
      throw argument_error("csr matrix: row offsets not monotone");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= p)
        throw argument_error("csr matrix: column index out of range");
      if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
        throw argument_error("csr matrix: columns not strictly increasing");
    }
  }
  Matrix m;
  m.storage_ = Storage::sparse;
  m.n_ = n;
  m.p_ = p;
  m.values_ = std::move(values);
  m.row_offsets_ = std::move(row_offsets);
  m.col_indices_ = std::move(col_indices);
  return m;
}

bool Matrix::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Matrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= p_) throw argument_error("matrix index out of range");
  if (storage_ == Storage::dense) return values_[i * p_ + j];
  const auto begin = col_indices_.begin() + static_cast<long>(row_offsets_[i]);
  const auto end = col_indices_.begin() + static_cast<long>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void Matrix::matvec(std::span<const double> z, std::span<double> out) const {
  if (z.size() != p_ || out.size() != n_)
    throw argument_error("matvec: dimension mismatch");
  if (storage_ == Storage::dense) {
    const double* row = values_.data();
    for (std::size_t i = 0; i < n_; ++i, row += p_) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p_; ++j) acc += row[j] * z[j];
      out[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        acc += values_[k] * z[col_indices_[k]];
      out[i] = acc;
    }
  }
}

void Matrix::matvec_transpose(std::span<const double> w,
                              std::span<double> out) const {
  if (w.size() != n_ || out.size() != p_)
    throw argument_error("matvec_transpose: dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  if (storage_ == Storage::dense) {
    const double* row = values_.data();
    for (std::size_t i = 0; i < n_; ++i, row += p_) {
      const double wi = w[i];
      if (wi == 0.0) continue;
      for (std::size_t j = 0; j < p_; ++j) out[j] += wi * row[j];
    }
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      const double wi = w[i];
      if (wi == 0.0) continue;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        out[col_indices_[k]] += wi * values_[k];
    }
  }
}

void Matrix::matvec_support(std::span<const double> z,
                            std::span<const std::size_t> support,
                            std::span<double> out) const {
  if (z.size() != p_ || out.size() != n_)
    throw argument_error("matvec_support: dimension mismatch");
  if (storage_ == Storage::sparse) {
    // Row entries already skip zeros; the full product is O(nnz).
    matvec(z, out);
    return;
  }
  const double* row = values_.data();
  for (std::size_t i = 0; i < n_; ++i, row += p_) {
    double acc = 0.0;
    for (std::size_t j : support) acc += row[j] * z[j];
    out[i] = acc;
  }
}

void Matrix::gather_columns(const SupportSet& T, std::vector<double>& out) const {
  const std::size_t k = T.size();
  for (std::size_t j : T.indices)
    if (j >= p_) throw argument_error("gather_columns: index out of range");
  out.assign(n_ * k, 0.0);
  if (storage_ == Storage::dense) {
    const double* row = values_.data();
    for (std::size_t i = 0; i < n_; ++i, row += p_)
      for (std::size_t a = 0; a < k; ++a) out[a * n_ + i] = row[T.indices[a]];
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
        const auto it = std::lower_bound(T.indices.begin(), T.indices.end(),
                                         col_indices_[e]);
        if (it != T.indices.end() && *it == col_indices_[e]) {
          const std::size_t a = static_cast<std::size_t>(it - T.indices.begin());
          out[a * n_ + i] = values_[e];
        }
      }
    }
  }
}

std::vector<double> Matrix::row_l1_norms() const {
  std::vector<double> out(n_, 0.0);
  if (storage_ == Storage::dense) {
    const double* row = values_.data();
    for (std::size_t i = 0; i < n_; ++i, row += p_) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p_; ++j) acc += std::fabs(row[j]);
      out[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        acc += std::fabs(values_[k]);
      out[i] = acc;
    }
  }
  return out;
}

double Matrix::max_row_l1() const {
  double best = 0.0;
  for (double v : row_l1_norms()) best = std::max(best, v);
  return best;
}

std::span<const double> Matrix::dense_values() const {
  if (storage_ != Storage::dense)
    throw argument_error("dense_values on sparse matrix");
  return values_;
}

std::span<const std::size_t> Matrix::csr_row_offsets() const {
  if (storage_ != Storage::sparse)
    throw argument_error("csr view on dense matrix");
  return row_offsets_;
}

std::span<const std::size_t> Matrix::csr_col_indices() const {
  if (storage_ != Storage::sparse)
    throw argument_error("csr view on dense matrix");
  return col_indices_;
}

std::span<const double> Matrix::csr_values() const {
  if (storage_ != Storage::sparse)
    throw argument_error("csr view on dense matrix");
  return values_;
}

Dataset Dataset::make(Matrix X, std::vector<double> y) {
  if (X.rows() < 1 || X.cols() < 1)
    throw argument_error("dataset: need n >= 1 and p >= 1");
  if (y.size() != X.rows())
    throw argument_error("dataset: label count != row count");
  if (!X.all_finite()) throw argument_error("dataset: non-finite entry in X");
  for (double v : y)
    if (v != 0.0 && v != 1.0)
      throw argument_error("dataset: labels must be 0 or 1");
  Dataset ds{std::move(X), std::move(y), {}};
  ds.c.resize(ds.y.size());
  for (std::size_t i = 0; i < ds.y.size(); ++i) ds.c[i] = 2.0 * ds.y[i] - 1.0;
  return ds;
}

}  // namespace nslr
