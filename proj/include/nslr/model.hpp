#pragma once

#include <cmath>
#include <vector>

#include "nslr/matrix.hpp"

namespace nslr {

// Loss kernels for the averaged logistic loss
//   l(z) = (1/n) sum_i [ ln(1 + e^<x_i,z>) - y_i <x_i,z> ].
// Gradient and Hessian follow the standard forms
//   grad l(z) = X^T (h(z) - y) / n,    h_i = sigmoid(<x_i,z>)
//   hess l(z) = X^T D(z) X / n,        D_ii = h_i (1 - h_i) in (0, 1/4].
// Only sub-blocks of the Hessian are ever materialized.

// Smoothness constants of the loss on this dataset:
//   lambda_x = lambda_max(X^T X) / (4n)   (gradient Lipschitz / strong smoothness)
//   gamma_x  = 12 lambda_x max_i ||x_i||_1   (Hessian Lipschitz)
struct ModelConstants {
  double lambda_x = 0.0;
  double gamma_x = 0.0;
};

double stable_sigmoid(double t);
// ln(1 + e^t) evaluated as max(t,0) + log1p(e^-|t|); no overflow for any t.
double softplus(double t);

// Raw scores X z.
std::vector<double> margins(const Dataset& ds, const std::vector<double>& z);
// Same, exploiting supp(z) inside `support`.
std::vector<double> margins_support(const Dataset& ds,
                                    const std::vector<double>& z,
                                    const SupportSet& support);

// h(z); every entry strictly inside (0,1) up to float saturation.
std::vector<double> sigmoid_probs(const Dataset& ds,
                                  const std::vector<double>& z);

double loss(const Dataset& ds, const std::vector<double>& z);
double loss_from_margins(const Dataset& ds, const std::vector<double>& m);

std::vector<double> gradient(const Dataset& ds, const std::vector<double>& z);
void gradient_from_margins(const Dataset& ds, const std::vector<double>& m,
                           std::vector<double>& out);

// diag of D(z), computed as h(1-h) from the stable sigmoid.
std::vector<double> hessian_weights(const Dataset& ds,
                                    const std::vector<double>& z);
std::vector<double> hessian_weights_from_margins(const std::vector<double>& m);

// Block X_rows^T D(z) X_cols / n, row-major |rows| x |cols|.
std::vector<double> hessian_block(const Dataset& ds,
                                  const std::vector<double>& z,
                                  const SupportSet& rows,
                                  const SupportSet& cols);
// Same with precomputed weights (solver hot path).
std::vector<double> hessian_block_from_weights(const Dataset& ds,
                                               const std::vector<double>& w,
                                               const SupportSet& rows,
                                               const SupportSet& cols);

// lambda_max(X^T X) by power iteration on w -> X^T (X w), relative tolerance
// 1e-8, cap 1000 sweeps; throws numeric_error carrying the partial estimate
// if the cap is hit.
ModelConstants model_constants(const Dataset& ds);

// Right-hand side of the logistic-vs-linear comparison:
//   ln 2 - 1/4 + ||X z - c||^2 / (4n),  c = 2y - 1.
// Always an upper bound for loss(ds, z); tight at z = 0.
double linear_loss_bound(const Dataset& ds, const std::vector<double>& z);

// Least-squares point on the columns T: z_T = pinv(X_T) c, zero elsewhere.
// Guaranteed loss(z) < ln 2 when X_T^T c != 0 and X_T has full column rank;
// otherwise throws condition_error (z = 0 is already optimal in the
// X^T c = 0 case).
std::vector<double> svd_descent_point(const Dataset& ds, const SupportSet& T);

}  // namespace nslr
