#include "nslr/stationarity.hpp"

#include <algorithm>
#include <cmath>

#include "nslr/linalg.hpp"
#include "nslr/model.hpp"

namespace nslr {

const char* to_string(Stationarity s) {
  switch (s) {
    case Stationarity::strong: return "strong";
    case Stationarity::plain: return "plain";
    default: return "none";
  }
}

namespace {

struct TopSelection {
  std::vector<std::size_t> indices;  // sorted ascending
  bool tie_at_boundary = false;
};

// Indices of the s largest magnitudes under the total order
// (magnitude desc, index asc), O(p) expected plus an O(s log s) sort.
// tie_at_boundary reports equality between the s-th and (s+1)-th magnitudes.
template <typename MagFn>
TopSelection select_top(std::size_t p, std::size_t s, MagFn mag) {
  TopSelection out;
  std::vector<std::pair<double, std::size_t>> items(p);
  for (std::size_t j = 0; j < p; ++j) items[j] = {mag(j), j};
  auto better = [](const std::pair<double, std::size_t>& a,
                   const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  if (s < p)
    std::nth_element(items.begin(), items.begin() + static_cast<long>(s) - 1,
                     items.end(), better);
  const double boundary = items[s - 1].first;
  if (s < p) {
    for (std::size_t j = s; j < p; ++j)
      if (items[j].first == boundary) {
        out.tie_at_boundary = true;
        break;
      }
  }
  out.indices.resize(s);
  for (std::size_t k = 0; k < s; ++k) out.indices[k] = items[k].second;
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace

std::vector<double> project_sparse(const std::vector<double>& z, std::size_t s) {
  const std::size_t p = z.size();
  if (s < 1 || s > p) throw argument_error("project_sparse: need 1 <= s <= p");
  if (s == p) return z;
  const TopSelection sel = select_top(p, s, [&](std::size_t j) { return std::fabs(z[j]); });
  std::vector<double> out(p, 0.0);
  for (std::size_t j : sel.indices) out[j] = z[j];
  return out;
}

SupportSelection select_support(const Iterate& u, double tau, std::size_t s) {
  const std::size_t p = u.z.size();
  if (u.d.size() != p) throw argument_error("select_support: z/d length mismatch");
  if (!(tau > 0.0)) throw argument_error("select_support: tau must be positive");
  if (s < 1 || s > p) throw argument_error("select_support: need 1 <= s <= p");
  TopSelection sel =
      select_top(p, s, [&](std::size_t j) { return std::fabs(u.z[j] - tau * u.d[j]); });
  SupportSelection out;
  out.support = SupportSet(std::move(sel.indices));
  out.tie_at_boundary = sel.tie_at_boundary;
  return out;
}

double kth_largest_abs(const std::vector<double>& z, std::size_t k) {
  if (k < 1 || k > z.size())
    throw argument_error("kth_largest_abs: k out of range");
  std::vector<double> mags(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) mags[j] = std::fabs(z[j]);
  std::nth_element(mags.begin(), mags.begin() + static_cast<long>(k) - 1,
                   mags.end(), std::greater<double>());
  return mags[k - 1];
}

StationaryResidual stationary_residual_with_gradient(
    const Iterate& u, const SupportSet& T, const std::vector<double>& grad) {
  const std::size_t p = u.z.size();
  if (u.d.size() != p || grad.size() != p)
    throw argument_error("stationary_residual: length mismatch");
  const std::size_t s = T.size();
  StationaryResidual out;
  out.stacked.resize(2 * p);
  // Blocks in display order: d_T, z_Tbar, (d - grad)_T, (d - grad)_Tbar.
  std::size_t k = 0;
  for (std::size_t a = 0; a < s; ++a) out.stacked[a] = u.d[T.indices[a]];
  std::size_t pos = s;
  for (std::size_t j = 0; j < p; ++j) {
    if (k < s && T.indices[k] == j) {
      ++k;
    } else {
      out.stacked[pos++] = u.z[j];
    }
  }
  for (std::size_t a = 0; a < s; ++a)
    out.stacked[pos + a] = u.d[T.indices[a]] - grad[T.indices[a]];
  pos += s;
  k = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (k < s && T.indices[k] == j) {
      ++k;
    } else {
      out.stacked[pos++] = u.d[j] - grad[j];
    }
  }
  double sq = 0.0;
  for (double v : out.stacked) sq += v * v;
  out.norm = std::sqrt(sq);
  return out;
}

StationaryResidual stationary_residual(const Dataset& ds, const Iterate& u,
                                       const SupportSet& T) {
  return stationary_residual_with_gradient(u, T, gradient(ds, u.z));
}

double stationary_residual_norm(const Iterate& u, const SupportSet& T,
                                const std::vector<double>& grad) {
  const std::size_t p = u.z.size();
  if (u.d.size() != p || grad.size() != p)
    throw argument_error("stationary_residual_norm: length mismatch");
  double sq = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < p; ++j) {
    const double gite = u.d[j] - grad[j];
    sq += gite * gite;
    if (k < T.size() && T.indices[k] == j) {
      sq += u.d[j] * u.d[j];
      ++k;
    } else {
      sq += u.z[j] * u.z[j];
    }
  }
  return std::sqrt(sq);
}

Stationarity classify_stationary(const Dataset& ds,
                                 const std::vector<double>& z, double tau,
                                 std::size_t s, double tol) {
  const std::size_t p = ds.p();
  if (z.size() != p) throw argument_error("classify_stationary: z length");
  if (!(tau > 0.0)) throw argument_error("classify_stationary: tau <= 0");
  if (s < 1 || s > p) throw argument_error("classify_stationary: bad s");

  const std::vector<double> d = gradient(ds, z);
  const double tol_eff = tol * std::max(1.0, inf_norm(d));

  std::size_t nz = 0;
  double min_on = 0.0, max_on_grad = 0.0, max_off_grad = 0.0;
  bool first_on = true;
  for (std::size_t j = 0; j < p; ++j) {
    if (z[j] != 0.0) {
      ++nz;
      const double az = std::fabs(z[j]);
      min_on = first_on ? az : std::min(min_on, az);
      first_on = false;
      max_on_grad = std::max(max_on_grad, std::fabs(d[j]));
    } else {
      max_off_grad = std::max(max_off_grad, std::fabs(d[j]));
    }
  }

  if (nz > s) return Stationarity::none;
  if (nz < s) {
    // [z]_s = 0, so plain and strong coincide with grad l(z) = 0.
    const double all = std::max(max_on_grad, max_off_grad);
    return all <= tol_eff ? Stationarity::strong : Stationarity::none;
  }
  if (max_on_grad > tol_eff) return Stationarity::none;
  const double threshold = min_on / tau;  // [z]_s / tau
  if (max_off_grad < threshold - tol_eff) return Stationarity::strong;
  if (max_off_grad <= threshold + tol_eff) return Stationarity::plain;
  return Stationarity::none;
}

namespace {

void check_small_scale(const Dataset& ds, const Iterate& u, const SupportSet& T,
                       std::size_t cap) {
  if (ds.p() > cap)
    throw argument_error("jacobian assembly refused: p exceeds the small-scale cap");
  if (u.z.size() != ds.p() || u.d.size() != ds.p())
    throw argument_error("jacobian: iterate length mismatch");
  if (T.size() == 0 || T.size() > ds.p())
    throw argument_error("jacobian: bad support size");
  for (std::size_t j : T.indices)
    if (j >= ds.p()) throw argument_error("jacobian: support index out of range");
}

SupportSet full_support(std::size_t p) {
  std::vector<std::size_t> idx(p);
  for (std::size_t j = 0; j < p; ++j) idx[j] = j;
  return SupportSet(std::move(idx));
}

}  // namespace

std::vector<double> jacobian_dense(const Dataset& ds, const Iterate& u,
                                   const SupportSet& T, std::size_t cap) {
  check_small_scale(ds, u, T, cap);
  const std::size_t p = ds.p();
  const std::size_t s = T.size();
  const SupportSet all = full_support(p);
  const std::vector<double> H = hessian_block(ds, u.z, all, all);
  const std::vector<std::size_t> comp = T.complement(p);

  // Row/column order [z_T, z_Tbar, d_T, d_Tbar].
  std::vector<std::size_t> order(p);
  for (std::size_t a = 0; a < s; ++a) order[a] = T.indices[a];
  for (std::size_t b = 0; b < comp.size(); ++b) order[s + b] = comp[b];

  const std::size_t m = 2 * p;
  std::vector<double> J(m * m, 0.0);
  for (std::size_t a = 0; a < s; ++a) J[a * m + (p + a)] = 1.0;  // dF1/dd_T
  for (std::size_t b = 0; b < p - s; ++b)
    J[(s + b) * m + (s + b)] = 1.0;  // dF2/dz_Tbar
  for (std::size_t r = 0; r < p; ++r) {
    const std::size_t row = p + r;          // F3 then F4 block rows
    for (std::size_t cidx = 0; cidx < p; ++cidx)
      J[row * m + cidx] = -H[order[r] * p + order[cidx]];
    J[row * m + (p + r)] = 1.0;             // dF3/dd_T, dF4/dd_Tbar
  }
  return J;
}

std::vector<double> jacobian_inverse_formula(const Dataset& ds,
                                             const Iterate& u,
                                             const SupportSet& T,
                                             std::size_t cap) {
  check_small_scale(ds, u, T, cap);
  const std::size_t p = ds.p();
  const std::size_t s = T.size();
  const std::size_t r = p - s;

  const double lam = restricted_min_eigenvalue(ds, T);
  if (!(lam > 0.0))
    throw condition_error("columns in T are linearly dependent");

  const SupportSet comp_set(T.complement(p));
  const std::vector<double> w = hessian_weights(ds, u.z);
  std::vector<double> A = hessian_block_from_weights(ds, w, T, T);        // s x s
  const std::vector<double> B = hessian_block_from_weights(ds, w, T, comp_set);  // s x r
  const std::vector<double> E =
      hessian_block_from_weights(ds, w, comp_set, comp_set);              // r x r

  if (!cholesky_factor(A, s, 1e-12))
    throw condition_error("reduced Hessian block is singular");
  const std::vector<double> Ainv = cholesky_inverse(A, s);

  // AinvB (s x r), CAinv = (AinvB)^T by symmetry, R = E - B^T AinvB.
  std::vector<double> AinvB(s * r, 0.0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s; ++k) acc += Ainv[i * s + k] * B[k * r + j];
      AinvB[i * r + j] = acc;
    }
  std::vector<double> R(r * r, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s; ++k) acc += B[k * r + i] * AinvB[k * r + j];
      R[i * r + j] = E[i * r + j] - acc;
    }

  const std::size_t m = 2 * p;
  std::vector<double> Jinv(m * m, 0.0);
  // Row blocks: z_T (s), z_Tbar (r), d_T (s), d_Tbar (r);
  // column blocks at offsets 0, s, p, p+s.
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      Jinv[i * m + j] = Ainv[i * s + j];
      Jinv[i * m + (p + j)] = -Ainv[i * s + j];
    }
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < r; ++j)
      Jinv[i * m + (s + j)] = -AinvB[i * r + j];
  for (std::size_t i = 0; i < r; ++i) Jinv[(s + i) * m + (s + i)] = 1.0;
  for (std::size_t i = 0; i < s; ++i) Jinv[(p + i) * m + i] = 1.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      const double v = AinvB[j * r + i];  // (C A^-1)_{ij} = (A^-1 B)_{ji}
      Jinv[(p + s + i) * m + j] = v;
      Jinv[(p + s + i) * m + (p + j)] = -v;
    }
    for (std::size_t j = 0; j < r; ++j)
      Jinv[(p + s + i) * m + (s + j)] = R[i * r + j];
    Jinv[(p + s + i) * m + (p + s + i)] = 1.0;
  }
  return Jinv;
}

double restricted_min_eigenvalue(const Dataset& ds, const SupportSet& T) {
  const std::size_t t = T.size();
  if (t == 0) throw argument_error("restricted_min_eigenvalue: empty support");
  for (std::size_t j : T.indices)
    if (j >= ds.p())
      throw argument_error("restricted_min_eigenvalue: index out of range");
  std::vector<double> a;
  ds.X.gather_columns(T, a);
  std::vector<double> ones(ds.n(), 1.0);
  std::vector<double> gram(t * t, 0.0);
  weighted_gram(a.data(), ones.data(), ds.n(), t, 1.0, gram.data());
  const std::vector<double> eig = jacobi_eigenvalues(std::move(gram), t);
  return std::max(eig.front(), 0.0);
}

}  // namespace nslr
