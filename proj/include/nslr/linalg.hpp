#pragma once

#include <cstddef>
#include <vector>

namespace nslr {

// Small dense symmetric kernels shared by the model and solver code. All
// matrices are row-major. Sizes here are s-by-s (a few hundred at most),
// never p-by-p.

// In-place lower Cholesky of a symmetric matrix. Returns false when a pivot
// falls at or below pivot_rel_tol * max(initial diagonal), which is how
// rank-deficient column subsets surface.
bool cholesky_factor(std::vector<double>& a, std::size_t n,
                     double pivot_rel_tol = 0.0);

// Solve L L^T x = b given the factor from cholesky_factor; b is overwritten.
void cholesky_solve(const std::vector<double>& factor, std::size_t n,
                    std::vector<double>& b);

// Dense inverse from the factor (n solves against identity columns).
std::vector<double> cholesky_inverse(const std::vector<double>& factor,
                                     std::size_t n);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Destroys its copy of `a`.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                       std::size_t max_sweeps = 128);

// G = A^T diag(w) A / denom for a column-major n-by-k matrix A, written into
// the row-major k-by-k buffer g. Blocked so the working set stays in cache;
// only the upper triangle is computed, then mirrored.
void weighted_gram(const double* a, const double* w, std::size_t n,
                   std::size_t k, double denom, double* g);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double inf_norm(const std::vector<double>& a);

}  // namespace nslr
