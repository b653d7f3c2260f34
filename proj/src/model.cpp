#include "nslr/model.hpp"

#include <algorithm>
#include <cmath>

#include "nslr/linalg.hpp"
#include "nslr/rng.hpp"

namespace nslr {

double stable_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::fabs(t)));
}

static void check_point(const Dataset& ds, const std::vector<double>& z) {
  if (z.size() != ds.p()) throw argument_error("z has wrong length");
  for (double v : z)
    if (!std::isfinite(v)) throw argument_error("z has non-finite entry");
}

std::vector<double> margins(const Dataset& ds, const std::vector<double>& z) {
  check_point(ds, z);
  std::vector<double> m(ds.n());
  ds.X.matvec(z, m);
  return m;
}

std::vector<double> margins_support(const Dataset& ds,
                                    const std::vector<double>& z,
                                    const SupportSet& support) {
  check_point(ds, z);
  std::vector<double> m(ds.n());
  ds.X.matvec_support(z, support.indices, m);
  return m;
}

std::vector<double> sigmoid_probs(const Dataset& ds,
                                  const std::vector<double>& z) {
  std::vector<double> h = margins(ds, z);
  for (double& v : h) v = stable_sigmoid(v);
  return h;
}

double loss_from_margins(const Dataset& ds, const std::vector<double>& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i)
    acc += softplus(m[i]) - ds.y[i] * m[i];
  return acc / static_cast<double>(ds.n());
}

double loss(const Dataset& ds, const std::vector<double>& z) {
  return loss_from_margins(ds, margins(ds, z));
}

void gradient_from_margins(const Dataset& ds, const std::vector<double>& m,
                           std::vector<double>& out) {
  const double inv_n = 1.0 / static_cast<double>(ds.n());
  std::vector<double> r(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i)
    r[i] = (stable_sigmoid(m[i]) - ds.y[i]) * inv_n;
  out.resize(ds.p());
  ds.X.matvec_transpose(r, out);
}

std::vector<double> gradient(const Dataset& ds, const std::vector<double>& z) {
  std::vector<double> g;
  gradient_from_margins(ds, margins(ds, z), g);
  return g;
}

std::vector<double> hessian_weights_from_margins(const std::vector<double>& m) {
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double h = stable_sigmoid(m[i]);
    w[i] = h * (1.0 - h);
  }
  return w;
}

std::vector<double> hessian_weights(const Dataset& ds,
                                    const std::vector<double>& z) {
  return hessian_weights_from_margins(margins(ds, z));
}

std::vector<double> hessian_block_from_weights(const Dataset& ds,
                                               const std::vector<double>& w,
                                               const SupportSet& rows,
                                               const SupportSet& cols) {
  const std::size_t n = ds.n();
  for (std::size_t j : rows.indices)
    if (j >= ds.p()) throw argument_error("hessian_block: row index out of range");
  for (std::size_t j : cols.indices)
    if (j >= ds.p()) throw argument_error("hessian_block: col index out of range");

  const std::size_t kr = rows.size();
  const std::size_t kc = cols.size();
  std::vector<double> block(kr * kc, 0.0);

  if (!ds.X.is_sparse()) {
    if (rows.indices == cols.indices) {
      std::vector<double> a;
      ds.X.gather_columns(rows, a);
      weighted_gram(a.data(), w.data(), n, kr, static_cast<double>(n),
                    block.data());
      return block;
    }
    std::vector<double> ar, ac;
    ds.X.gather_columns(rows, ar);
    ds.X.gather_columns(cols, ac);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t a = 0; a < kr; ++a)
      for (std::size_t b = 0; b < kc; ++b) {
        double acc = 0.0;
        const double* ca = ar.data() + a * n;
        const double* cb = ac.data() + b * n;
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * ca[i] * cb[i];
        block[a * kc + b] = acc * inv_n;
      }
    return block;
  }

  // Sparse: one pass over the rows, rank-1 updates on the entries that land
  // in both index sets. Cost O(nnz + sum_i k_i^2).
  std::vector<long> slot_r(ds.p(), -1), slot_c(ds.p(), -1);
  for (std::size_t a = 0; a < kr; ++a) slot_r[rows.indices[a]] = static_cast<long>(a);
  for (std::size_t b = 0; b < kc; ++b) slot_c[cols.indices[b]] = static_cast<long>(b);
  const auto offs = ds.X.csr_row_offsets();
  const auto cidx = ds.X.csr_col_indices();
  const auto vals = ds.X.csr_values();
  std::vector<std::pair<std::size_t, double>> in_r, in_c;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    in_r.clear();
    in_c.clear();
    for (std::size_t e = offs[i]; e < offs[i + 1]; ++e) {
      const long a = slot_r[cidx[e]];
      if (a >= 0) in_r.emplace_back(static_cast<std::size_t>(a), vals[e]);
      const long b = slot_c[cidx[e]];
      if (b >= 0) in_c.emplace_back(static_cast<std::size_t>(b), vals[e]);
    }
    if (in_r.empty() || in_c.empty()) continue;
    const double wi = w[i] * inv_n;
    for (const auto& [a, va] : in_r)
      for (const auto& [b, vb] : in_c) block[a * kc + b] += wi * va * vb;
  }
  return block;
}

std::vector<double> hessian_block(const Dataset& ds,
                                  const std::vector<double>& z,
                                  const SupportSet& rows,
                                  const SupportSet& cols) {
  check_point(ds, z);
  return hessian_block_from_weights(ds, hessian_weights(ds, z), rows, cols);
}

ModelConstants model_constants(const Dataset& ds) {
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  constexpr double rel_tol = 1e-8;
  constexpr std::size_t cap = 1000;

  // Deterministic pseudo-random start; an all-ones start can be orthogonal
  // to the top eigenvector on symmetric designs.
  Rng rng(0x5EEDu);
  std::vector<double> q(p);
  for (double& v : q) v = rng.next_gaussian();
  double qn = norm2(q);
  if (qn == 0.0) q[0] = qn = 1.0;
  for (double& v : q) v /= qn;

  std::vector<double> xq(n), w(p);
  double lambda = 0.0;
  bool done = false;
  for (std::size_t it = 0; it < cap; ++it) {
    ds.X.matvec(q, xq);
    const double next = dot(xq, xq);  // Rayleigh quotient, q is unit
    ds.X.matvec_transpose(xq, w);
    const double wn = norm2(w);
    if (wn == 0.0) {
      lambda = 0.0;
      done = true;
      break;
    }
    for (std::size_t j = 0; j < p; ++j) q[j] = w[j] / wn;
    if (it > 0 && std::fabs(next - lambda) <= rel_tol * std::max(next, 1e-300)) {
      lambda = next;
      done = true;
      break;
    }
    lambda = next;
  }
  if (!done)
    throw numeric_error("power iteration hit the iteration cap", lambda);

  ModelConstants c;
  c.lambda_x = lambda / (4.0 * static_cast<double>(n));
  c.gamma_x = 12.0 * c.lambda_x * ds.X.max_row_l1();
  return c;
}

double linear_loss_bound(const Dataset& ds, const std::vector<double>& z) {
  const std::vector<double> m = margins(ds, z);
  double ss = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double r = m[i] - ds.c[i];
    ss += r * r;
  }
  constexpr double ln2 = 0.69314718055994530942;
  return ln2 - 0.25 + ss / (4.0 * static_cast<double>(ds.n()));
}

std::vector<double> svd_descent_point(const Dataset& ds, const SupportSet& T) {
  const std::size_t n = ds.n();
  const std::size_t t = T.size();
  if (t == 0) throw argument_error("svd_descent_point: empty support");
  for (std::size_t j : T.indices)
    if (j >= ds.p()) throw argument_error("svd_descent_point: index out of range");

  std::vector<double> a;
  ds.X.gather_columns(T, a);
  std::vector<double> rhs(t, 0.0);
  for (std::size_t k = 0; k < t; ++k) {
    const double* col = a.data() + k * n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += col[i] * ds.c[i];
    rhs[k] = acc;
  }
  if (inf_norm(rhs) == 0.0)
    throw condition_error("X_T^T c = 0; z = 0 is already optimal");

  // pinv(X_T) c through the normal equations; identical to the thin-SVD
  // expression V Lambda^-1 U^T c when X_T has full column rank.
  std::vector<double> ones(n, 1.0);
  std::vector<double> gram(t * t, 0.0);
  weighted_gram(a.data(), ones.data(), n, t, 1.0, gram.data());
  if (!cholesky_factor(gram, t, 1e-12))
    throw condition_error("X_T is rank deficient");
  cholesky_solve(gram, t, rhs);

  std::vector<double> z(ds.p(), 0.0);
  for (std::size_t k = 0; k < t; ++k) z[T.indices[k]] = rhs[k];
  return z;
}

}  // namespace nslr
