#pragma once

#include <cstddef>
#include <vector>

#include "nslr/matrix.hpp"

namespace nslr {

// Primal point plus gradient surrogate, u = (z; d). Inside the solver d
// tracks grad l(z) only to first order between refreshes, which is exactly
// what the stationary equation wants.
struct Iterate {
  std::vector<double> z;
  std::vector<double> d;
};

// Support chosen as the s largest |z_i - tau d_i|. Ties are broken toward
// the smallest index so runs are reproducible; tie_at_boundary reports that
// the s-th and (s+1)-th magnitudes coincide, i.e. the selection was not
// unique and other admissible supports exist.
struct SupportSelection {
  SupportSet support;
  bool tie_at_boundary = false;
};

enum class Stationarity { strong, plain, none };

const char* to_string(Stationarity s);

// Hard-thresholding projection onto {||z||_0 <= s}: keeps the s entries of
// largest magnitude (smallest index wins ties), zeroes the rest.
std::vector<double> project_sparse(const std::vector<double>& z, std::size_t s);

SupportSelection select_support(const Iterate& u, double tau, std::size_t s);

// k-th largest |z_i|, 1-based k, zeros counted; requires 1 <= k <= z.size().
double kth_largest_abs(const std::vector<double>& z, std::size_t k);

// The stationary-equation residual for a fixed support T,
//   F(u; T) = [ d_T ; z_Tbar ; d_T - grad_T l(z) ; d_Tbar - grad_Tbar l(z) ],
// stacked in exactly that block order (length 2p) together with its
// Euclidean norm. F vanishes for every admissible T iff z is a strong
// tau-stationary point with d = grad l(z).
struct StationaryResidual {
  std::vector<double> stacked;
  double norm = 0.0;
};

StationaryResidual stationary_residual(const Dataset& ds, const Iterate& u,
                                       const SupportSet& T);
StationaryResidual stationary_residual_with_gradient(
    const Iterate& u, const SupportSet& T, const std::vector<double>& grad);
// Norm only, no 2p allocation; the solver loop calls this once per iteration.
double stationary_residual_norm(const Iterate& u, const SupportSet& T,
                                const std::vector<double>& grad);

// Classification of z against the fixed-point condition
// z = P_S(z - tau grad l(z)) with d = grad l(z):
//   strong:  ||z||_0 < s and d = 0, or ||z||_0 = s, d_supp = 0 and
//            |d_i| <  [z]_s / tau  strictly off the support;
//   plain:   the same with <= off the support;
//   none:    otherwise.
// Zero tests use tol scaled by max(1, ||d||_inf).
Stationarity classify_stationary(const Dataset& ds,
                                 const std::vector<double>& z, double tau,
                                 std::size_t s, double tol = 1e-8);

// Exact 2p x 2p Jacobian of F(u; T), rows and columns ordered
// [z_T, z_Tbar, d_T, d_Tbar]. Verification only: refuses p above the cap so
// nobody sneaks it into a solve path.
std::vector<double> jacobian_dense(const Dataset& ds, const Iterate& u,
                                   const SupportSet& T, std::size_t cap = 64);

// Closed-form inverse of the same Jacobian, built from (hess_TT)^-1 and
// R(z) = -hess_TbarT (hess_TT)^-1 hess_TTbar + hess_TbarTbar.
// Requires the columns in T to be linearly independent.
std::vector<double> jacobian_inverse_formula(const Dataset& ds,
                                             const Iterate& u,
                                             const SupportSet& T,
                                             std::size_t cap = 64);

// lambda_min(X_T^T X_T); strictly positive iff the columns in T are
// linearly independent.
double restricted_min_eigenvalue(const Dataset& ds, const SupportSet& T);

}  // namespace nslr
