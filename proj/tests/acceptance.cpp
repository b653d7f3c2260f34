// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier than the unit tests; the largest instance is
// p = 10000, n = 2000, s = 500 run over ten seeds.

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nslr/bench.hpp"
#include "nslr/data.hpp"
#include "nslr/linalg.hpp"
#include "nslr/model.hpp"
#include "nslr/solver.hpp"
#include "nslr/stationarity.hpp"
#include "oracles.hpp"

using namespace nslr;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

// ---------------------------------------------------------------- shared runs

struct SmokeRun {
  std::uint64_t seed;
  SolverReport nslr_full;
  SolverReport nslr_budget;
  SolverReport iht_budget;
  Dataset data;
};

std::vector<SmokeRun> smoke_runs;

void prepare_smoke_runs() {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PreparedData gen = gen_example2(Spec2{200, 1000, 50, 0.5, seed});
    SolverConfig cfg;
    cfg.s = 50;
    SolverReport full = nslr_solve(gen.train, cfg);
    SolverConfig budget = cfg;
    budget.max_iter = 100;
    SolverReport nb = nslr_solve(gen.train, budget);
    SolverReport ib = iht_solve(gen.train, budget);
    smoke_runs.push_back(SmokeRun{seed, std::move(full), std::move(nb),
                                  std::move(ib), std::move(gen.train)});
  }
}

// ---------------------------------------------------------------- criteria

std::size_t criterion1_peak_ws = 0;

Outcome criterion1_scale_reproduction() {
  Outcome o;
  const std::size_t p = 10000, n = 2000, s = 500;
  double sum_loss = 0, sum_grad = 0, sum_ser = 0, max_nnz = 0, max_time = 0;
  std::size_t converged = 0;
  std::size_t peak_ws = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PreparedData gen = gen_example2(Spec2{n, p, s, 0.5, seed});
    SolverConfig cfg;
    cfg.s = s;
    const SolverReport rep = nslr_solve(gen.train, cfg);
    sum_loss += rep.final_loss;
    sum_grad += rep.final_grad_norm;
    sum_ser += ser(gen.train, rep.z_final);
    max_nnz = std::max(max_nnz, static_cast<double>(rep.nnz));
    max_time = std::max(max_time, rep.solve_seconds);
    peak_ws = std::max(peak_ws, rep.peak_workspace_bytes);
    converged += rep.converged ? 1 : 0;
  }
  const double mean_loss = sum_loss / 10, mean_grad = sum_grad / 10,
               mean_ser = sum_ser / 10;
  o.pass = mean_loss <= 1e-6 && mean_grad <= 1e-5 && mean_ser == 0.0 &&
           max_nnz <= static_cast<double>(s) && max_time <= 120.0;
  o.detail << "mean loss " << mean_loss << ", mean grad " << mean_grad
           << ", mean ser " << mean_ser << ", max nnz " << max_nnz
           << ", max time " << max_time << " s, converged " << converged
           << "/10, peak workspace " << peak_ws / (1024.0 * 1024.0) << " MiB";
  // stash for criterion 11
  criterion1_peak_ws = peak_ws;
  return o;
}

Outcome criterion2_smoke() {
  Outcome o;
  std::size_t good = 0;
  double max_time = 0;
  for (const SmokeRun& run : smoke_runs) {
    const SolverReport& r = run.nslr_full;
    max_time = std::max(max_time, r.solve_seconds);
    if (r.converged && r.iterations <= 50 && r.final_residual <= 1e-6) ++good;
  }
  o.pass = good >= 9 && max_time <= 2.0;
  o.detail << good << "/10 converged within 50 iterations, max time "
           << max_time << " s";
  return o;
}

Outcome criterion3_quadratic_tail() {
  Outcome o;
  std::size_t checked = 0;
  for (const SmokeRun& run : smoke_runs) {
    const SolverReport& r = run.nslr_full;
    if (!r.converged) continue;
    ++checked;
    const auto& tr = r.trace;
    std::size_t k0 = tr.size();
    for (std::size_t k = 0; k < tr.size(); ++k)
      if (tr[k].residual < 1e-2) {
        k0 = k;
        break;
      }
    if (k0 == tr.size()) {
      o.pass = false;
      o.detail << "seed " << run.seed << ": residual never fell below 1e-2; ";
      continue;
    }
    std::size_t k_done = tr.size();
    for (std::size_t k = k0; k < tr.size(); ++k)
      if (tr[k].residual < 1e-6) {
        k_done = k;
        break;
      }
    if (k_done == tr.size() || k_done - k0 > 4) {
      o.pass = false;
      o.detail << "seed " << run.seed << ": "
               << (k_done == tr.size() ? 999 : k_done - k0)
               << " iterations from 1e-2 to 1e-6; ";
    }
    for (std::size_t k = k0; k + 1 < tr.size(); ++k) {
      if (tr[k + 1].residual > std::pow(tr[k].residual, 1.5)) {
        o.pass = false;
        o.detail << "seed " << run.seed << ": ||F_{k+1}|| > ||F_k||^1.5 at k="
                 << k << " (" << tr[k].residual << " -> " << tr[k + 1].residual
                 << "); ";
        break;
      }
    }
  }
  if (o.pass) o.detail << "superlinear tail on all " << checked << " converged runs";
  return o;
}

Outcome criterion4_derivative_oracles() {
  Outcome o;
  Rng rng(0xACCE97);
  double worst_g = 0, worst_h = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 5 + rng.next_below(26);   // <= 30
    const std::size_t p = 3 + rng.next_below(10);   // <= 12
    const Dataset ds = oracle::random_dataset(rng, n, p);
    const auto z = oracle::random_point(rng, p);
    const auto g = gradient(ds, z);
    const double step = 1e-5 * std::max(1.0, norm2(z));
    for (std::size_t j = 0; j < p; ++j) {
      const double fd = oracle::central_diff(
          [&](const std::vector<double>& w) { return loss(ds, w); }, z, j, step);
      worst_g = std::max(worst_g,
                         std::fabs(g[j] - fd) / std::max(1.0, std::fabs(fd)));
    }
    const std::size_t bs = 1 + rng.next_below(std::min<std::size_t>(4, p));
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < bs; ++j) idx.push_back(j * (p / bs));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    const SupportSet T = SupportSet::checked(idx, p);
    const auto B = hessian_block(ds, z, T, T);
    for (std::size_t b = 0; b < T.size(); ++b) {
      std::vector<double> zp = z, zm = z;
      zp[T.indices[b]] += 1e-5;
      zm[T.indices[b]] -= 1e-5;
      const auto gp = gradient(ds, zp);
      const auto gm = gradient(ds, zm);
      for (std::size_t a = 0; a < T.size(); ++a) {
        const double fd = (gp[T.indices[a]] - gm[T.indices[a]]) / 2e-5;
        worst_h = std::max(worst_h, std::fabs(B[a * T.size() + b] - fd) /
                                        std::max(1.0, std::fabs(fd)));
      }
    }
  }
  o.pass = worst_g <= 1e-6 && worst_h <= 1e-5;
  o.detail << "max gradient rel err " << worst_g << ", max hessian rel err "
           << worst_h;
  return o;
}

Outcome criterion5_jacobian_inverse() {
  Outcome o;
  Rng rng(0x1AC0B1);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t p = 5 + rng.next_below(6);   // <= 10
    const std::size_t n = p + 2 + rng.next_below(8);
    const std::size_t s = 1 + rng.next_below(4);   // <= 4
    const Dataset ds = oracle::random_dataset(rng, n, p);
    Iterate u{oracle::random_point(rng, p, 0.6), oracle::random_point(rng, p, 0.6)};
    const SupportSet T = select_support(u, 1.0, s).support;
    const auto J = jacobian_dense(ds, u, T);
    const auto Ji = jacobian_inverse_formula(ds, u, T);
    const std::size_t m = 2 * p;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += J[i * m + k] * Ji[k * m + j];
        worst = std::max(worst, std::fabs(acc - (i == j ? 1.0 : 0.0)));
      }
  }
  o.pass = worst <= 1e-8;
  o.detail << "max |J J^-1 - I| = " << worst << " over 20 instances";
  return o;
}

Outcome criterion6_stationarity_certificate() {
  Outcome o;
  std::size_t checked = 0;
  double worst = 0;
  for (const SmokeRun& run : smoke_runs) {
    const SolverReport& r = run.nslr_full;
    if (!r.converged || r.tie_flag) continue;
    ++checked;
    const auto g = gradient(run.data, r.z_final);
    std::vector<double> moved(r.z_final.size());
    for (std::size_t j = 0; j < moved.size(); ++j)
      moved[j] = r.z_final[j] - r.final_tau * g[j];
    const auto proj = project_sparse(moved, 50);
    for (std::size_t j = 0; j < moved.size(); ++j)
      worst = std::max(worst, std::fabs(proj[j] - r.z_final[j]));
    if (worst > 10 * 1e-6) o.pass = false;
    if (r.stationarity_class == Stationarity::none) {
      o.pass = false;
      o.detail << "seed " << run.seed << " classified none; ";
    }
  }
  o.detail << checked << " tie-free converged runs, max fixed-point gap "
           << worst;
  return o;
}

Outcome criterion7_global_optimality() {
  Outcome o;
  // 32 samples, 4 features. Coordinates 3 and 4 carry balanced sign
  // patterns, so flipping either one maps the sample set to itself and the
  // unique unconstrained optimum has z3 = z4 = 0: two nonzeros, below s = 3.
  std::vector<double> vals;
  std::vector<double> labels;
  const double signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int base = 0; base < 2; ++base) {
    for (const auto& sg : signs) {
      for (int copy = 0; copy < 4; ++copy) {
        vals.insert(vals.end(), {base == 0 ? 1.0 : 0.0, base == 0 ? 0.0 : 1.0,
                                 sg[0], sg[1]});
        const bool majority = copy < 3;
        labels.push_back(base == 0 ? (majority ? 1.0 : 0.0)
                                   : (majority ? 0.0 : 1.0));
      }
    }
  }
  const Dataset ds =
      Dataset::make(Matrix::dense(32, 4, std::move(vals)), std::move(labels));

  // Generic dense Newton on all four coordinates (oracle side).
  std::vector<double> zu(4, 0.0);
  for (int it = 0; it < 100; ++it) {
    const auto g = oracle::gradient_scalar(ds, zu);
    std::vector<double> H(16, 0.0);
    for (std::size_t i = 0; i < 32; ++i) {
      const double t = oracle::dot_row(ds, i, zu);
      const double h = oracle::sigmoid_scalar(t);
      const double w = h * (1.0 - h) / 32.0;
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
          H[a * 4 + b] += w * ds.X.at(i, a) * ds.X.at(i, b);
    }
    const auto step = oracle::dense_solve(H, g);
    double move = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      zu[j] -= step[j];
      move += std::fabs(step[j]);
    }
    if (move < 1e-14) break;
  }
  const double loss_u = loss(ds, zu);
  std::size_t nnz_u = 0;
  for (double v : zu) nnz_u += (std::fabs(v) > 1e-9);

  SolverConfig cfg;
  cfg.s = 3;
  const SolverReport rep = nslr_solve(ds, cfg);
  const double gap = std::fabs(rep.final_loss - loss_u);
  o.pass = nnz_u < cfg.s && rep.converged && rep.final_grad_norm <= 1e-6 &&
           gap <= 1e-8;
  o.detail << "oracle nnz " << nnz_u << " (z1 " << zu[0] << ", z2 " << zu[1]
           << "), grad norm " << rep.final_grad_norm << ", loss gap " << gap
           << ", global flag " << (rep.global_minimizer ? "yes" : "no");
  return o;
}

Outcome criterion8_bound_suite() {
  Outcome o;
  Rng rng(0xB0071E5);
  double worst_smooth = -1, worst_hess = -1, worst_bound = -1;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + rng.next_below(12);
    const std::size_t p = 2 + rng.next_below(6);
    const Dataset ds = oracle::random_dataset(rng, n, p);
    const ModelConstants c = model_constants(ds);
    const auto a = oracle::random_point(rng, p);
    const auto b = oracle::random_point(rng, p);

    const auto gb = gradient(ds, b);
    double ip = 0, nn = 0;
    for (std::size_t j = 0; j < p; ++j) {
      ip += gb[j] * (a[j] - b[j]);
      nn += (a[j] - b[j]) * (a[j] - b[j]);
    }
    worst_smooth = std::max(
        worst_smooth, loss(ds, a) - (loss(ds, b) + ip + 0.5 * c.lambda_x * nn));

    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;
    const SupportSet full = SupportSet::checked(all, p);
    const auto Ha = hessian_block(ds, a, full, full);
    const auto Hb = hessian_block(ds, b, full, full);
    double hf = 0;
    for (std::size_t k = 0; k < Ha.size(); ++k)
      hf += (Ha[k] - Hb[k]) * (Ha[k] - Hb[k]);
    worst_hess =
        std::max(worst_hess, std::sqrt(hf) - c.gamma_x * std::sqrt(nn));

    worst_bound = std::max(worst_bound, loss(ds, a) - linear_loss_bound(ds, a));
  }
  o.pass = worst_smooth <= 1e-10 && worst_hess <= 1e-10 && worst_bound <= 1e-10;
  o.detail << "max violations: smoothness " << worst_smooth << ", hessian "
           << worst_hess << ", linear bound " << worst_bound;
  return o;
}

Outcome criterion9_generator_statistics() {
  Outcome o;
  const PreparedData half = gen_example2(Spec2{2000, 50, 5, 0.5, 4242});
  double corr = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < 2000; ++i)
    for (std::size_t j = 0; j + 1 < 50; ++j) {
      corr += half.train.X.at(i, j) * half.train.X.at(i, j + 1);
      ++cnt;
    }
  corr /= cnt;

  const PreparedData zero = gen_example2(Spec2{2000, 50, 5, 0.0, 4243});
  double corr0 = 0;
  for (std::size_t i = 0; i < 2000; ++i)
    for (std::size_t j = 0; j + 1 < 50; ++j)
      corr0 += zero.train.X.at(i, j) * zero.train.X.at(i, j + 1);
  corr0 /= cnt;

  const PreparedData one = gen_example2(Spec2{200, 20, 3, 1.0, 4244});
  bool constant_rows = true;
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t j = 1; j < 20; ++j)
      constant_rows =
          constant_rows && one.train.X.at(i, j) == one.train.X.at(i, 0);

  o.pass = corr >= 0.45 && corr <= 0.55 && std::fabs(corr0) <= 0.05 &&
           constant_rows;
  o.detail << "lag-1 corr at rho=0.5: " << corr << ", at rho=0: " << corr0
           << ", rho=1 rows constant: " << (constant_rows ? "yes" : "no");
  return o;
}

Outcome criterion10_baseline_ordering() {
  Outcome o;
  std::size_t wins = 0;
  for (const SmokeRun& run : smoke_runs)
    if (run.nslr_budget.final_loss <= run.iht_budget.final_loss) ++wins;
  o.pass = wins >= 9;
  o.detail << "newton at or below the baseline loss in " << wins
           << "/10 budgeted runs";
  return o;
}

Outcome criterion11_memory(std::size_t peak_ws) {
  Outcome o;
  const double p = 10000, n = 2000, s = 500;
  const double dense_pp = 8.0 * p * p;
  const double structural = 8.0 * (2 * n * s + 2 * s * s + 64 * (p + n));
  o.pass = peak_ws > 0 && static_cast<double>(peak_ws) <= 0.05 * dense_pp &&
           static_cast<double>(peak_ws) <= structural;
  o.detail << "peak solver workspace " << peak_ws / (1024.0 * 1024.0)
           << " MiB vs " << dense_pp / (1024.0 * 1024.0)
           << " MiB for a dense p x p (bound "
           << structural / (1024.0 * 1024.0) << " MiB)";
  return o;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };

  prepare_smoke_runs();

  const std::vector<Entry> entries{
      {1, "desk-scale correlated-data reproduction", criterion1_scale_reproduction},
      {2, "scaled-down smoke", criterion2_smoke},
      {3, "quadratic-rate proxy", criterion3_quadratic_tail},
      {4, "gradient/hessian oracles", criterion4_derivative_oracles},
      {5, "jacobian inverse formula", criterion5_jacobian_inverse},
      {6, "stationarity certificate", criterion6_stationarity_certificate},
      {7, "global-optimality clause", criterion7_global_optimality},
      {8, "bound suite", criterion8_bound_suite},
      {9, "generator statistics", criterion9_generator_statistics},
      {10, "baseline ordering", criterion10_baseline_ordering},
      {11, "no dense p x p allocation",
       [] { return criterion11_memory(criterion1_peak_ws); }},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail << "exception: " << ex.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", e.id,
                e.name, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("all 11 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
