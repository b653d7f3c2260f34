#include "nslr/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "nslr/errors.hpp"

namespace nslr {

bool cholesky_factor(std::vector<double>& a, std::size_t n,
                     double pivot_rel_tol) {
  if (a.size() != n * n) throw argument_error("cholesky: bad buffer size");
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, a[i * n + i]);
  const double floor = pivot_rel_tol * max_diag;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > floor) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Zero the stale upper triangle so the factor is self-contained.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  return true;
}

void cholesky_solve(const std::vector<double>& factor, std::size_t n,
                    std::vector<double>& b) {
  if (factor.size() != n * n || b.size() != n)
    throw argument_error("cholesky_solve: size mismatch");
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= factor[i * n + k] * b[k];
    b[i] = s / factor[i * n + i];
  }
  // L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= factor[k * n + ii] * b[k];
    b[ii] = s / factor[ii * n + ii];
  }
}

std::vector<double> cholesky_inverse(const std::vector<double>& factor,
                                     std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    cholesky_solve(factor, n, col);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + j] = col[i];
  }
  return inv;
}

std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                       std::size_t max_sweeps) {
  if (a.size() != n * n) throw argument_error("jacobi: bad buffer size");
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2.0 * s);
  };
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  const double tol = 1e-13 * std::max(scale, 1e-300) * static_cast<double>(n);

  for (std::size_t sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
    for (std::size_t pq = 0; pq < n; ++pq) {
      for (std::size_t q = pq + 1; q < n; ++q) {
        const std::size_t p = pq;
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

void weighted_gram(const double* a, const double* w, std::size_t n,
                   std::size_t k, double denom, double* g) {
  constexpr std::size_t kRowBlock = 256;
  constexpr std::size_t kColTile = 16;
  std::fill(g, g + k * k, 0.0);
  double wa[kColTile][kRowBlock];

  for (std::size_t r0 = 0; r0 < n; r0 += kRowBlock) {
    const std::size_t rb = std::min(kRowBlock, n - r0);
    for (std::size_t a0 = 0; a0 < k; a0 += kColTile) {
      const std::size_t at = std::min(kColTile, k - a0);
      for (std::size_t ai = 0; ai < at; ++ai) {
        const double* col = a + (a0 + ai) * n + r0;
        for (std::size_t i = 0; i < rb; ++i) wa[ai][i] = w[r0 + i] * col[i];
      }
      for (std::size_t b = a0; b < k; ++b) {
        const double* cb = a + b * n + r0;
        const std::size_t a_hi = std::min(at, b - a0 + 1);
        for (std::size_t ai = 0; ai < a_hi; ++ai) {
          double acc = 0.0;
          const double* wrow = wa[ai];
          for (std::size_t i = 0; i < rb; ++i) acc += wrow[i] * cb[i];
          g[(a0 + ai) * k + b] += acc;
        }
      }
    }
  }
  const double inv = 1.0 / denom;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      const double v = g[i * k + j] * inv;
      g[i * k + j] = v;
      g[j * k + i] = v;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double inf_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

}  // namespace nslr
