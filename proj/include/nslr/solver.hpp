#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nslr/matrix.hpp"
#include "nslr/stationarity.hpp"

namespace nslr {

struct SolverConfig {
  std::size_t s = 1;          // sparsity level, 1 <= s <= p
  double tau0 = 1.0;          // initial tau
  double tau_decay = 0.1;     // multiplicative decay factor, in (0,1)
  double epsilon = 1e-6;      // stop when ||F|| < epsilon
  std::size_t max_iter = 1000;
  double ridge_mu = 1e-10;    // added to the reduced block only on factorization failure
  std::vector<double> z0;     // empty means all-zeros

  void validate(std::size_t p) const;
};

// One row per iteration, recorded before the Newton step runs.
struct TraceRecord {
  std::size_t iter = 0;
  double residual = 0.0;   // ||F(u_k; T_k)|| with the tau used for selection
  double tau = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;    // wall time since the loop started
  std::vector<std::size_t> support;
  bool tie_at_boundary = false;
};

struct SolverReport {
  std::vector<double> z_final;
  bool converged = false;
  std::size_t iterations = 0;  // Newton / projection steps actually taken
  std::vector<TraceRecord> trace;
  Stationarity stationarity_class = Stationarity::none;
  bool tie_flag = false;            // boundary tie at the final selection
  double final_tau = 0.0;
  double final_residual = 0.0;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  std::size_t nnz = 0;
  double solve_seconds = 0.0;       // loop only, excludes data handling
  // Set when the run converged with ||grad l(z)|| <= epsilon: together with
  // stationarity this certifies a global minimizer of the constrained
  // problem, not just a local one.
  bool global_minimizer = false;
  std::string error;                // nonempty if a numeric failure aborted the loop
  std::size_t peak_workspace_bytes = 0;  // solver-owned buffers, O(ns + s^2 + p)
};

// Hook for tests and instrumentation; called once per iteration after the
// support selection and residual are known, before the step.
struct IterationState {
  std::size_t iter;
  const std::vector<double>& z;
  const std::vector<double>& d;
  const SupportSet& support;
  double tau;
  double residual;
};
using IterationObserver = std::function<void(const IterationState&)>;

// One Newton step on the stationary equation. Solves the reduced s x s
// system
//   hess_{T,T} l(z) v = hess_{T,Tprev} l(z) z_Tprev - grad_T l(z)
// and assembles
//   z+ = scatter(v, T),  d+_T = 0,
//   d+_Tbar = grad_Tbar l(z) + [hess l(z) (z+ - z)]_Tbar,
// where the Hessian products go through X restricted to the at-most-2s
// columns where z+ - z is nonzero. ridge_mu * I is added to the reduced
// block only if its factorization fails outright.
Iterate newton_step(const Dataset& ds, const Iterate& u, const SupportSet& T,
                    const SupportSet& T_prev, double ridge_mu);

// Adaptive tau schedule: decay when tau_k >= [z]_s / max_{j in Tbar} |d_j|
// and the residual still exceeds 1/k. A zero off-support d keeps tau
// (stationarity is near, decaying buys nothing). k >= 1 required; the
// convergence check always precedes the first update.
double tau_update(double tau, const std::vector<double>& z,
                  const std::vector<double>& d, const SupportSet& T,
                  double residual_norm, std::size_t k, double decay);

// Newton iteration on the stationary equation: select support, check
// convergence, update tau, take the reduced Newton step. Deterministic in
// (ds, cfg).
SolverReport nslr_solve(const Dataset& ds, const SolverConfig& cfg,
                        const IterationObserver& observer = {});

// Iterative hard thresholding baseline z+ = P_S(z - tau grad l(z)) with
// fixed tau = min(cfg.tau0, 1/lambda_x), same stopping rule and report
// shape as nslr_solve.
SolverReport iht_solve(const Dataset& ds, const SolverConfig& cfg,
                       const IterationObserver& observer = {});

}  // namespace nslr
