#include "nslr/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>

#include "nslr/linalg.hpp"
#include "nslr/model.hpp"

namespace nslr {

void SolverConfig::validate(std::size_t p) const {
  if (s < 1 || s > p) throw argument_error("config: need 1 <= s <= p");
  if (!(tau0 > 0.0)) throw argument_error("config: tau0 must be positive");
  if (!(tau_decay > 0.0 && tau_decay < 1.0))
    throw argument_error("config: tau_decay must lie in (0,1)");
  if (!(epsilon > 0.0)) throw argument_error("config: epsilon must be positive");
  if (!(ridge_mu >= 0.0)) throw argument_error("config: ridge_mu must be >= 0");
  if (!z0.empty() && z0.size() != p)
    throw argument_error("config: z0 has wrong length");
}

double tau_update(double tau, const std::vector<double>& z,
                  const std::vector<double>& d, const SupportSet& T,
                  double residual_norm, std::size_t k, double decay) {
  if (k < 1) throw argument_error("tau_update: k must be >= 1");
  if (!(tau > 0.0)) throw argument_error("tau_update: tau must be positive");
  const std::size_t p = z.size();
  if (d.size() != p) throw argument_error("tau_update: z/d length mismatch");

  double max_off = 0.0;
  std::size_t t = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (t < T.size() && T.indices[t] == j) {
      ++t;
    } else {
      max_off = std::max(max_off, std::fabs(d[j]));
    }
  }
  if (max_off == 0.0) return tau;  // stationarity is near; nothing to gain

  const double zs = kth_largest_abs(z, T.size());
  if (tau >= zs / max_off && residual_norm > 1.0 / static_cast<double>(k))
    return tau * decay;
  return tau;
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::vector<std::size_t> support_of(const std::vector<double>& z) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (z[j] != 0.0) out.push_back(j);
  return out;
}

std::vector<std::size_t> merge_sorted(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

// Scratch buffers for one solve; everything here is O(ns + s^2 + p + n),
// tracked so tests can assert the loop never grows a p-by-p footprint.
struct Workspace {
  std::vector<double> margin, weights, grad, wm, gathered, gram, gram_copy,
      rhs, z_new, d_new, delta_full, delta_margin, hess_delta;
  std::vector<std::size_t> union_idx;
  std::size_t peak_bytes = 0;

  void note_peak() {
    const std::size_t cur =
        sizeof(double) *
            (margin.capacity() + weights.capacity() + grad.capacity() +
             wm.capacity() + gathered.capacity() + gram.capacity() +
             gram_copy.capacity() + rhs.capacity() + z_new.capacity() +
             d_new.capacity() + delta_full.capacity() +
             delta_margin.capacity() + hess_delta.capacity()) +
        sizeof(std::size_t) * union_idx.capacity();
    peak_bytes = std::max(peak_bytes, cur);
  }
};

// Reduced Newton step; z, d, margin, weights, grad are the state at z^k.
// Writes z^{k+1}, d^{k+1} into ws.z_new / ws.d_new. supp_prev = supp(z^k).
void newton_core(const Dataset& ds, const std::vector<double>& z,
                 const std::vector<double>& grad,
                 const std::vector<double>& margin,
                 const std::vector<double>& weights, const SupportSet& T,
                 const std::vector<std::size_t>& supp_prev, double ridge_mu,
                 Workspace& ws) {
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  const std::size_t s = T.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Reduced system  hess_TT v = hess_{T,.} z - grad_T  (the right-hand
  // product reuses the margins: hess_{T,.} z = X_T^T (w .* X z) / n).
  ws.wm.resize(n);
  for (std::size_t i = 0; i < n; ++i) ws.wm[i] = weights[i] * margin[i];
  ws.rhs.assign(s, 0.0);

  const bool sparse = ds.X.is_sparse();
  if (!sparse) {
    ds.X.gather_columns(T, ws.gathered);
    ws.gram.assign(s * s, 0.0);
    weighted_gram(ws.gathered.data(), weights.data(), n, s,
                  static_cast<double>(n), ws.gram.data());
    for (std::size_t a = 0; a < s; ++a) {
      const double* col = ws.gathered.data() + a * n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += col[i] * ws.wm[i];
      ws.rhs[a] = acc * inv_n - grad[T.indices[a]];
    }
  } else {
    ws.gram = hessian_block_from_weights(ds, weights, T, T);
    ws.hess_delta.resize(p);
    ds.X.matvec_transpose(ws.wm, ws.hess_delta);
    for (std::size_t a = 0; a < s; ++a)
      ws.rhs[a] = ws.hess_delta[T.indices[a]] * inv_n - grad[T.indices[a]];
  }

  ws.gram_copy = ws.gram;
  bool ok = cholesky_factor(ws.gram, s, 1e-14);
  if (!ok && ridge_mu > 0.0) {
    ws.gram = ws.gram_copy;
    for (std::size_t a = 0; a < s; ++a) ws.gram[a * s + a] += ridge_mu;
    ok = cholesky_factor(ws.gram, s, 0.0);
  }
  if (!ok)
    throw numeric_error("reduced Hessian block is singular even after ridge",
                        0.0, T.indices);
  cholesky_solve(ws.gram, s, ws.rhs);
  for (double v : ws.rhs)
    if (!std::isfinite(v))
      throw numeric_error("reduced Newton solve produced non-finite values",
                          0.0, T.indices);

  ws.z_new.assign(p, 0.0);
  for (std::size_t a = 0; a < s; ++a) ws.z_new[T.indices[a]] = ws.rhs[a];

  // d+ off T is the first-order gradient estimate at z+:
  //   grad l(z) + hess l(z) (z+ - z),
  // with the Hessian product running through the <= 2s columns where the
  // step is nonzero.
  ws.union_idx = merge_sorted(T.indices, supp_prev);
  ws.delta_full.assign(p, 0.0);
  for (std::size_t j : ws.union_idx) ws.delta_full[j] = ws.z_new[j] - z[j];
  ws.delta_margin.resize(n);
  ds.X.matvec_support(ws.delta_full, ws.union_idx, ws.delta_margin);
  for (std::size_t i = 0; i < n; ++i) ws.delta_margin[i] *= weights[i];
  ws.hess_delta.resize(p);
  ds.X.matvec_transpose(ws.delta_margin, ws.hess_delta);

  ws.d_new.resize(p);
  for (std::size_t j = 0; j < p; ++j)
    ws.d_new[j] = grad[j] + ws.hess_delta[j] * inv_n;
  for (std::size_t j : T.indices) ws.d_new[j] = 0.0;
  ws.note_peak();
}

}  // namespace

Iterate newton_step(const Dataset& ds, const Iterate& u, const SupportSet& T,
                    const SupportSet& T_prev, double ridge_mu) {
  const std::size_t p = ds.p();
  if (u.z.size() != p || u.d.size() != p)
    throw argument_error("newton_step: iterate length mismatch");
  if (T.size() == 0 || T.size() > p)
    throw argument_error("newton_step: bad support size");
  for (std::size_t j : T.indices)
    if (j >= p) throw argument_error("newton_step: support index out of range");
  for (std::size_t j = 0; j < p; ++j)
    if (u.z[j] != 0.0 && !T_prev.contains(j))
      throw argument_error("newton_step: supp(z) not contained in T_prev");

  const std::vector<double> m = margins_support(ds, u.z, T_prev);
  const std::vector<double> w = hessian_weights_from_margins(m);
  std::vector<double> g;
  gradient_from_margins(ds, m, g);

  Workspace ws;
  newton_core(ds, u.z, g, m, w, T, support_of(u.z), ridge_mu, ws);
  return Iterate{std::move(ws.z_new), std::move(ws.d_new)};
}

SolverReport nslr_solve(const Dataset& ds, const SolverConfig& cfg,
                        const IterationObserver& observer) {
  const std::size_t p = ds.p();
  const std::size_t n = ds.n();
  cfg.validate(p);

  SolverReport rep;
  std::vector<double> z = cfg.z0.empty() ? std::vector<double>(p, 0.0) : cfg.z0;
  for (double v : z)
    if (!std::isfinite(v)) throw argument_error("z0 has non-finite entry");
  std::vector<std::size_t> supp_prev = support_of(z);
  if (supp_prev.size() > cfg.s)
    throw argument_error("z0 must satisfy ||z0||_0 <= s");

  Workspace ws;
  std::vector<double> d(p, 0.0);
  double tau = cfg.tau0;
  double res = 0.0;
  bool tie = false;

  const auto t0 = clock_type::now();
  ws.margin.resize(n);
  ds.X.matvec_support(z, supp_prev, ws.margin);
  gradient_from_margins(ds, ws.margin, ws.grad);
  d = ws.grad;  // d^0 = grad l(z^0)

  std::size_t k = 0;
  for (;; ++k) {
    const double cur_loss = loss_from_margins(ds, ws.margin);
    const double grad_norm = norm2(ws.grad);

    Iterate u{std::move(z), std::move(d)};
    SupportSelection sel = select_support(u, tau, cfg.s);
    res = stationary_residual_norm(u, sel.support, ws.grad);
    tie = sel.tie_at_boundary;

    rep.trace.push_back(TraceRecord{k, res, tau, cur_loss, grad_norm,
                                    seconds_since(t0), sel.support.indices,
                                    tie});
    if (observer)
      observer(IterationState{k, u.z, u.d, sel.support, tau, res});

    rep.final_loss = cur_loss;
    rep.final_grad_norm = grad_norm;
    if (res < cfg.epsilon) {
      rep.converged = true;
      z = std::move(u.z);
      d = std::move(u.d);
      break;
    }
    if (k >= cfg.max_iter) {
      z = std::move(u.z);
      d = std::move(u.d);
      break;
    }

    // The convergence check precedes the first decay, so k >= 1 here.
    if (k >= 1)
      tau = tau_update(tau, u.z, u.d, sel.support, res, k, cfg.tau_decay);

    try {
      ws.weights = hessian_weights_from_margins(ws.margin);
      newton_core(ds, u.z, ws.grad, ws.margin, ws.weights, sel.support,
                  supp_prev, cfg.ridge_mu, ws);
    } catch (const numeric_error& e) {
      rep.error = e.what();
      z = std::move(u.z);
      d = std::move(u.d);
      break;
    }
    z = std::move(ws.z_new);
    d = std::move(ws.d_new);
    supp_prev = sel.support.indices;

    // Refresh margins and gradient at the new point; supp(z) is inside the
    // just-used support, so the restricted product stays O(ns).
    ds.X.matvec_support(z, supp_prev, ws.margin);
    gradient_from_margins(ds, ws.margin, ws.grad);
  }

  rep.solve_seconds = seconds_since(t0);
  rep.iterations = k;
  rep.final_tau = tau;
  rep.final_residual = res;
  rep.tie_flag = tie;
  rep.z_final = std::move(z);
  rep.nnz = support_of(rep.z_final).size();
  rep.peak_workspace_bytes = ws.peak_bytes;
  // An eps-converged residual bounds the on-support gradient by ~2 eps, so
  // the classification tolerance must live on that scale, not at the 1e-8
  // default meant for exact points.
  rep.stationarity_class =
      classify_stationary(ds, rep.z_final, tau, cfg.s, 10.0 * cfg.epsilon);
  rep.global_minimizer = rep.converged && rep.final_grad_norm <= cfg.epsilon;
  return rep;
}

SolverReport iht_solve(const Dataset& ds, const SolverConfig& cfg,
                       const IterationObserver& observer) {
  const std::size_t p = ds.p();
  const std::size_t n = ds.n();
  cfg.validate(p);

  // Fixed step: tau < 1/lambda_x keeps projected gradient consistent with
  // the fixed-point condition at a global minimizer.
  const ModelConstants consts = model_constants(ds);
  const double tau = consts.lambda_x > 0.0
                         ? std::min(cfg.tau0, 1.0 / consts.lambda_x)
                         : cfg.tau0;

  SolverReport rep;
  std::vector<double> z = cfg.z0.empty() ? std::vector<double>(p, 0.0) : cfg.z0;
  for (double v : z)
    if (!std::isfinite(v)) throw argument_error("z0 has non-finite entry");
  std::vector<std::size_t> supp = support_of(z);
  if (supp.size() > cfg.s)
    throw argument_error("z0 must satisfy ||z0||_0 <= s");

  Workspace ws;
  double res = 0.0;
  bool tie = false;

  const auto t0 = clock_type::now();
  ws.margin.resize(n);

  std::size_t k = 0;
  for (;; ++k) {
    ds.X.matvec_support(z, supp, ws.margin);
    gradient_from_margins(ds, ws.margin, ws.grad);
    const double cur_loss = loss_from_margins(ds, ws.margin);
    const double grad_norm = norm2(ws.grad);

    Iterate u{std::move(z), ws.grad};  // d = grad l(z) exactly
    SupportSelection sel = select_support(u, tau, cfg.s);
    res = stationary_residual_norm(u, sel.support, ws.grad);
    tie = sel.tie_at_boundary;

    rep.trace.push_back(TraceRecord{k, res, tau, cur_loss, grad_norm,
                                    seconds_since(t0), sel.support.indices,
                                    tie});
    if (observer)
      observer(IterationState{k, u.z, u.d, sel.support, tau, res});

    rep.final_loss = cur_loss;
    rep.final_grad_norm = grad_norm;
    z = std::move(u.z);
    if (res < cfg.epsilon) {
      rep.converged = true;
      break;
    }
    if (k >= cfg.max_iter) break;

    // z+ = P_S(z - tau grad), realized on the already-selected support so
    // the tie rule matches the residual just measured.
    ws.z_new.assign(p, 0.0);
    for (std::size_t j : sel.support.indices)
      ws.z_new[j] = z[j] - tau * ws.grad[j];
    z = ws.z_new;
    supp = sel.support.indices;
    ws.note_peak();
  }

  rep.solve_seconds = seconds_since(t0);
  rep.iterations = k;
  rep.final_tau = tau;
  rep.final_residual = res;
  rep.tie_flag = tie;
  rep.z_final = std::move(z);
  rep.nnz = support_of(rep.z_final).size();
  rep.peak_workspace_bytes = ws.peak_bytes;
  rep.stationarity_class =
      classify_stationary(ds, rep.z_final, tau, cfg.s, 10.0 * cfg.epsilon);
  rep.global_minimizer = rep.converged && rep.final_grad_norm <= cfg.epsilon;
  return rep;
}

}  // namespace nslr
