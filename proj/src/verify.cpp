#include <cmath>
#include <sstream>

#include "nslr/bench.hpp"
#include "nslr/linalg.hpp"
#include "nslr/model.hpp"
#include "nslr/rng.hpp"
#include "nslr/solver.hpp"
#include "nslr/stationarity.hpp"

// Self-checks behind the `verify` CLI subcommand. Each check recomputes the
// quantity it tests through a second route (finite differences, naive
// stacking, explicit identities) so a regression in the main kernels cannot
// hide behind itself.

namespace nslr {

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p) {
  std::vector<double> v(n * p);
  for (double& x : v) x = rng.next_gaussian();
  std::vector<double> y(n);
  for (double& t : y) t = (rng.next_unit() < 0.5) ? 0.0 : 1.0;
  return Dataset::make(Matrix::dense(n, p, std::move(v)), std::move(y));
}

std::vector<double> random_point(Rng& rng, std::size_t p, double scale = 1.0) {
  std::vector<double> z(p);
  for (double& x : z) x = scale * rng.next_gaussian();
  return z;
}

// Central finite difference of the loss along coordinate j.
double fd_gradient_entry(const Dataset& ds, std::vector<double> z,
                         std::size_t j, double step) {
  z[j] += step;
  const double up = loss(ds, z);
  z[j] -= 2.0 * step;
  const double dn = loss(ds, z);
  return (up - dn) / (2.0 * step);
}

CheckResult check(const std::string& name, bool pass, double worst,
                  const std::string& what) {
  std::ostringstream detail;
  detail << what << " = " << worst;
  return CheckResult{name, pass, detail.str()};
}

}  // namespace

std::vector<CheckResult> run_verify(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  {  // gradient vs central finite differences
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t n = 4 + rng.next_below(16);
      const std::size_t p = 2 + rng.next_below(7);
      const Dataset ds = random_dataset(rng, n, p);
      const std::vector<double> z = random_point(rng, p);
      const std::vector<double> g = gradient(ds, z);
      const double step = 1e-5 * std::max(1.0, norm2(z));
      for (std::size_t j = 0; j < p; ++j) {
        const double fd = fd_gradient_entry(ds, z, j, step);
        const double rel =
            std::fabs(g[j] - fd) / std::max(1e-12, std::fabs(fd));
        worst = std::max(worst, rel);
      }
    }
    out.push_back(check("gradient_finite_difference", worst <= 1e-6, worst,
                        "max rel err"));
  }

  {  // hessian block vs finite differences of the gradient
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t n = 6 + rng.next_below(10);
      const std::size_t p = 4 + rng.next_below(4);
      const Dataset ds = random_dataset(rng, n, p);
      std::vector<double> z = random_point(rng, p, 0.5);
      std::vector<std::size_t> idx{0, 2, p - 1};
      const SupportSet T = SupportSet::checked(idx, p);
      const std::vector<double> H = hessian_block(ds, z, T, T);
      const double step = 1e-5;
      for (std::size_t b = 0; b < T.size(); ++b) {
        std::vector<double> zp = z, zm = z;
        zp[T.indices[b]] += step;
        zm[T.indices[b]] -= step;
        const std::vector<double> gp = gradient(ds, zp);
        const std::vector<double> gm = gradient(ds, zm);
        for (std::size_t a = 0; a < T.size(); ++a) {
          const double fd = (gp[T.indices[a]] - gm[T.indices[a]]) / (2 * step);
          const double rel = std::fabs(H[a * T.size() + b] - fd) /
                             std::max(1e-10, std::fabs(fd));
          worst = std::max(worst, rel);
        }
      }
    }
    out.push_back(check("hessian_block_finite_difference", worst <= 1e-5,
                        worst, "max rel err"));
  }

  {  // Jacobian times its closed-form inverse
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t n = 8 + rng.next_below(8);
      const std::size_t p = 4 + rng.next_below(4);
      const Dataset ds = random_dataset(rng, n, p);
      Iterate u{random_point(rng, p, 0.5), random_point(rng, p, 0.5)};
      const SupportSet T = select_support(u, 1.0, 3).support;
      const std::vector<double> J = jacobian_dense(ds, u, T);
      const std::vector<double> Ji = jacobian_inverse_formula(ds, u, T);
      const std::size_t m = 2 * p;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < m; ++k) acc += J[i * m + k] * Ji[k * m + j];
          worst = std::max(worst, std::fabs(acc - (i == j ? 1.0 : 0.0)));
        }
    }
    out.push_back(
        check("jacobian_inverse_identity", worst <= 1e-8, worst, "max |JJi - I|"));
  }

  {  // logistic loss below the linear-regression bound
    double worst = -1.0;
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + rng.next_below(12);
      const std::size_t p = 1 + rng.next_below(8);
      const Dataset ds = random_dataset(rng, n, p);
      const std::vector<double> z = random_point(rng, p);
      worst = std::max(worst, loss(ds, z) - linear_loss_bound(ds, z));
    }
    out.push_back(check("linear_loss_bound_dominates", worst <= 1e-10, worst,
                        "max (loss - bound)"));
  }

  {  // strong smoothness with lambda_x
    double worst = -1.0;
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 3 + rng.next_below(10);
      const std::size_t p = 2 + rng.next_below(6);
      const Dataset ds = random_dataset(rng, n, p);
      const double lx = model_constants(ds).lambda_x;
      const std::vector<double> a = random_point(rng, p);
      const std::vector<double> b = random_point(rng, p);
      const std::vector<double> gb = gradient(ds, b);
      double ip = 0.0, nn = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        ip += gb[j] * (a[j] - b[j]);
        nn += (a[j] - b[j]) * (a[j] - b[j]);
      }
      worst = std::max(worst, loss(ds, a) - (loss(ds, b) + ip + 0.5 * lx * nn));
    }
    out.push_back(
        check("strong_smoothness", worst <= 1e-10, worst, "max violation"));
  }

  {  // Hessian weights stay inside (0, 1/4]
    double lo = 1.0, hi = 0.0;
    const Dataset ds = random_dataset(rng, 30, 5);
    const std::vector<double> w = hessian_weights(ds, random_point(rng, 5, 3.0));
    for (double v : w) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.push_back(check("hessian_weights_range", lo > 0.0 && hi <= 0.25, hi,
                        "max weight"));
  }

  {  // projection: idempotent, closest point, consistent with selection
    bool ok = true;
    double worst = 0.0;
    for (int rep = 0; rep < 50 && ok; ++rep) {
      const std::size_t p = 4 + rng.next_below(12);
      const std::size_t s = 1 + rng.next_below(p - 1);
      const std::vector<double> z = random_point(rng, p);
      const std::vector<double> pz = project_sparse(z, s);
      if (project_sparse(pz, s) != pz) ok = false;
      double dz = 0.0;
      for (std::size_t j = 0; j < p; ++j) dz += (z[j] - pz[j]) * (z[j] - pz[j]);
      for (int w = 0; w < 20; ++w) {
        std::vector<double> cand(p, 0.0);
        for (std::size_t t = 0; t < s; ++t)
          cand[rng.next_below(p)] = rng.next_gaussian();
        double dc = 0.0;
        for (std::size_t j = 0; j < p; ++j)
          dc += (z[j] - cand[j]) * (z[j] - cand[j]);
        worst = std::max(worst, dz - dc);
        if (dz > dc + 1e-12) ok = false;
      }
      Iterate u{z, random_point(rng, p)};
      const double tau = 0.5;
      const SupportSelection sel = select_support(u, tau, s);
      std::vector<double> moved(p);
      for (std::size_t j = 0; j < p; ++j) moved[j] = z[j] - tau * u.d[j];
      const std::vector<double> pm = project_sparse(moved, s);
      for (std::size_t j = 0; j < p; ++j) {
        const bool kept = pm[j] != 0.0 || moved[j] == 0.0;
        const bool selected = sel.support.contains(j);
        if (pm[j] != 0.0 && !selected) ok = false;
        (void)kept;
      }
    }
    out.push_back(check("projection_laws", ok, worst, "max optimality gap"));
  }

  {  // stacked residual equals a naive reassembly
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 5 + rng.next_below(10);
      const std::size_t p = 3 + rng.next_below(8);
      const Dataset ds = random_dataset(rng, n, p);
      Iterate u{random_point(rng, p), random_point(rng, p)};
      const std::size_t s = 1 + rng.next_below(p);
      const SupportSet T = select_support(u, 1.0, s).support;
      const StationaryResidual r = stationary_residual(ds, u, T);
      const std::vector<double> g = gradient(ds, u.z);
      std::vector<double> naive;
      for (std::size_t j : T.indices) naive.push_back(u.d[j]);
      for (std::size_t j = 0; j < p; ++j)
        if (!T.contains(j)) naive.push_back(u.z[j]);
      for (std::size_t j : T.indices) naive.push_back(u.d[j] - g[j]);
      for (std::size_t j = 0; j < p; ++j)
        if (!T.contains(j)) naive.push_back(u.d[j] - g[j]);
      for (std::size_t k = 0; k < naive.size(); ++k)
        worst = std::max(worst, std::fabs(naive[k] - r.stacked[k]));
    }
    out.push_back(check("residual_reassembly", worst <= 1e-14, worst,
                        "max block mismatch"));
  }

  {  // the 3x3 worked instance: strong at tau=1, not at tau=10
    const Dataset ds = Dataset::make(
        Matrix::dense(3, 3, {1, 1, 0, 1, 1, 0, 0, 0, 1}), {0, 1, 1});
    const std::vector<double> z{1.0, -1.0, 0.0};
    const bool strong1 = classify_stationary(ds, z, 1.0, 2) == Stationarity::strong;
    const bool none10 = classify_stationary(ds, z, 10.0, 2) != Stationarity::strong;
    const std::vector<double> g = gradient(ds, z);
    const double gerr = std::fabs(g[2] + 1.0 / 6.0) + std::fabs(g[0]) + std::fabs(g[1]);
    out.push_back(check("worked_example_stationarity",
                        strong1 && none10 && gerr <= 1e-15, gerr,
                        "gradient deviation"));
  }

  {  // one-variable Newton step has the closed-form solution
    const Dataset ds =
        Dataset::make(Matrix::dense(1, 2, {1.0, 0.0}), {1.0});
    const SupportSet T = SupportSet::checked({0}, 2);
    const Iterate u{{0.0, 0.0}, gradient(ds, {0.0, 0.0})};
    const Iterate next = newton_step(ds, u, T, T, 0.0);
    const double err = std::fabs(next.z[0] - 2.0) + std::fabs(next.z[1]) +
                       std::fabs(next.d[0]) + std::fabs(next.d[1]);
    out.push_back(check("newton_step_scalar", err <= 1e-12, err, "deviation"));
  }

  {  // end-to-end smoke: small correlated instance solves to tolerance
    const PreparedData data =
        gen_example2(Spec2{60, 150, 8, 0.5, seed ^ 0xA5A5ULL});
    SolverConfig cfg;
    cfg.s = 8;
    const SolverReport rep = nslr_solve(data.train, cfg);
    const bool ok = rep.converged && rep.final_residual < cfg.epsilon &&
                    rep.nnz <= cfg.s &&
                    rep.stationarity_class != Stationarity::none;
    out.push_back(check("solver_smoke", ok, rep.final_residual,
                        "final residual"));
  }

  return out;
}

}  // namespace nslr
