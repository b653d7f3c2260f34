#include "nslr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nslr/model.hpp"
#include "nslr/rng.hpp"

namespace nslr {

PreparedData gen_example1(const Spec1& spec) {
  if (spec.n < 2) throw argument_error("example1: need n >= 2");
  if (spec.p < 1) throw argument_error("example1: need p >= 1");
  const std::size_t n = spec.n;
  const std::size_t p = spec.p;
  Rng rng(spec.seed);

  // Random half/half class split: the first floor(n/2) positions of a
  // shuffled permutation take label 0.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<double> y(n, 1.0);
  for (std::size_t i = 0; i < n / 2; ++i) y[perm[i]] = 0.0;

  // x_i = y_i v_i 1 + w_i; v_i is drawn for every row so the stream layout
  // does not depend on the labels.
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.next_gaussian();
    const double shift = (y[i] == 1.0) ? v : 0.0;
    for (std::size_t j = 0; j < p; ++j)
      values[i * p + j] = shift + rng.next_gaussian();
  }

  std::ostringstream prov;
  prov << "example1(n=" << n << ",p=" << p << ",seed=" << spec.seed << ")";
  PreparedData out{Dataset::make(Matrix::dense(n, p, std::move(values)),
                                 std::move(y)),
                   std::nullopt, p, prov.str(), std::nullopt, spec.seed};
  return out;
}

PreparedData gen_example2(const Spec2& spec) {
  if (spec.n < 1) throw argument_error("example2: need n >= 1");
  if (spec.s < 1 || spec.s > spec.p)
    throw argument_error("example2: need 1 <= s <= p");
  if (!(spec.rho >= 0.0 && spec.rho <= 1.0))
    throw argument_error("example2: rho must lie in [0,1]");
  const std::size_t n = spec.n;
  const std::size_t p = spec.p;
  Rng rng(spec.seed);

  // Ground truth: s standard-Gaussian values at uniform random positions.
  const std::vector<std::size_t> pos = rng.sample_without_replacement(p, spec.s);
  std::vector<double> truth(p, 0.0);
  for (std::size_t j : pos) {
    double v = 0.0;
    while (v == 0.0) v = rng.next_gaussian();  // keep ||z*||_0 = s exact
    truth[j] = v;
  }

  // AR(1) rows with unit marginal variance and lag-1 correlation rho. The
  // innovation is drawn even when rho = 1 so streams have one shape.
  const double carry = spec.rho;
  const double fresh = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.next_gaussian();
    values[i * p] = x;
    for (std::size_t j = 1; j < p; ++j) {
      const double v = rng.next_gaussian();
      x = carry * x + fresh * v;
      values[i * p + j] = x;
    }
  }

  // Pr{y_i = 1 | x_i} = sigmoid(<x_i, z*>).
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double margin = 0.0;
    for (std::size_t j : pos) margin += values[i * p + j] * truth[j];
    y[i] = (rng.next_unit() <= stable_sigmoid(margin)) ? 1.0 : 0.0;
  }

  std::ostringstream prov;
  prov << "example2(n=" << n << ",p=" << p << ",s=" << spec.s
       << ",rho=" << spec.rho << ",seed=" << spec.seed << ")";
  PreparedData out{Dataset::make(Matrix::dense(n, p, std::move(values)),
                                 std::move(y)),
                   std::nullopt, p, prov.str(), std::move(truth), spec.seed};
  return out;
}

std::vector<double> map_labels(const std::vector<double>& raw) {
  std::set<double> distinct(raw.begin(), raw.end());
  if (distinct.size() > 2)
    throw argument_error("labels: more than two distinct values");
  std::vector<double> out(raw.size());
  if (distinct.size() <= 1) {
    const double v = raw.empty() ? 0.0 : *distinct.begin();
    std::fill(out.begin(), out.end(), v > 0.0 ? 1.0 : 0.0);
    return out;
  }
  const double lo = *distinct.begin();
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = (raw[i] == lo) ? 0.0 : 1.0;
  return out;
}

Dataset parse_libsvm(std::istream& in, std::size_t p_override) {
  std::vector<double> raw_labels;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
  std::size_t max_index = 0;  // 1-based
  std::size_t line_no = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) throw parse_error("missing label", line_no);
    char* end = nullptr;
    const double label = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(label))
      throw parse_error("bad label '" + tok + "'", line_no);
    if (label != -1.0 && label != 0.0 && label != 1.0 && label != 2.0)
      throw parse_error("unknown label value '" + tok + "'", line_no);
    raw_labels.push_back(label);

    std::size_t prev_index = 0;
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw parse_error("malformed feature '" + tok + "'", line_no);
      const std::string idx_s = tok.substr(0, colon);
      const std::string val_s = tok.substr(colon + 1);
      end = nullptr;
      const unsigned long long idx = std::strtoull(idx_s.c_str(), &end, 10);
      if (end == idx_s.c_str() || *end != '\0' || idx == 0)
        throw parse_error("bad feature index '" + idx_s + "'", line_no);
      if (idx <= prev_index)
        throw parse_error("indices not strictly increasing", line_no);
      end = nullptr;
      const double val = std::strtod(val_s.c_str(), &end);
      if (end == val_s.c_str() || *end != '\0' || !std::isfinite(val))
        throw parse_error("bad feature value '" + val_s + "'", line_no);
      prev_index = idx;
      max_index = std::max(max_index, static_cast<std::size_t>(idx));
      col_indices.push_back(static_cast<std::size_t>(idx - 1));
      values.push_back(val);
    }
    row_offsets.push_back(values.size());
  }

  if (raw_labels.empty()) throw parse_error("empty dataset", line_no);
  std::size_t p = std::max<std::size_t>(max_index, 1);
  if (p_override > 0) {
    if (p_override < max_index)
      throw argument_error("p override smaller than the largest index seen");
    p = p_override;
  }
  Matrix X = Matrix::csr(raw_labels.size(), p, std::move(row_offsets),
                         std::move(col_indices), std::move(values));

  // Alphabet-aware mapping: {1,2} files put 2 on the positive class, the
  // {-1,0,+1} family maps by sign (every -1 becomes 0).
  bool has_two = false;
  for (double v : raw_labels) has_two = has_two || (v == 2.0);
  std::vector<double> y(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i)
    y[i] = has_two ? (raw_labels[i] == 2.0 ? 1.0 : 0.0)
                   : (raw_labels[i] > 0.0 ? 1.0 : 0.0);
  return Dataset::make(std::move(X), std::move(y));
}

Dataset parse_libsvm_file(const std::string& path, std::size_t p_override) {
  std::ifstream in(path);
  if (!in) throw argument_error("cannot open '" + path + "'");
  return parse_libsvm(in, p_override);
}

void serialize_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out << static_cast<int>(ds.y[i]);
    if (ds.X.is_sparse()) {
      const auto offs = ds.X.csr_row_offsets();
      const auto cols = ds.X.csr_col_indices();
      const auto vals = ds.X.csr_values();
      for (std::size_t e = offs[i]; e < offs[i + 1]; ++e) {
        if (vals[e] == 0.0) continue;
        std::snprintf(buf, sizeof buf, " %zu:%.17g", cols[e] + 1, vals[e]);
        out << buf;
      }
    } else {
      const auto vals = ds.X.dense_values();
      for (std::size_t j = 0; j < ds.p(); ++j) {
        const double v = vals[i * ds.p() + j];
        if (v == 0.0) continue;
        std::snprintf(buf, sizeof buf, " %zu:%.17g", j + 1, v);
        out << buf;
      }
    }
    out << '\n';
  }
}

void serialize_libsvm_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw argument_error("cannot write '" + path + "'");
  serialize_libsvm(ds, out);
}

Dataset densify(const Dataset& ds) {
  if (!ds.X.is_sparse()) return ds;
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  std::vector<double> v(n * p, 0.0);
  const auto offs = ds.X.csr_row_offsets();
  const auto cols = ds.X.csr_col_indices();
  const auto vals = ds.X.csr_values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = offs[i]; e < offs[i + 1]; ++e)
      v[i * p + cols[e]] = vals[e];
  return Dataset::make(Matrix::dense(n, p, std::move(v)), ds.y);
}

namespace {

enum class Axis { rows, columns };

// Center to mean zero and scale to unit population variance along one axis;
// zero-variance slices stay centered and unscaled.
Dataset standardize(const Dataset& ds, Axis axis) {
  if (ds.X.is_sparse())
    throw argument_error("standardization expects a dense matrix");
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  std::vector<double> v(ds.X.dense_values().begin(), ds.X.dense_values().end());

  const std::size_t outer = (axis == Axis::rows) ? n : p;
  const std::size_t inner = (axis == Axis::rows) ? p : n;
  for (std::size_t a = 0; a < outer; ++a) {
    auto at = [&](std::size_t b) -> double& {
      return (axis == Axis::rows) ? v[a * p + b] : v[b * p + a];
    };
    double mean = 0.0;
    for (std::size_t b = 0; b < inner; ++b) mean += at(b);
    mean /= static_cast<double>(inner);
    double var = 0.0;
    for (std::size_t b = 0; b < inner; ++b) {
      at(b) -= mean;
      var += at(b) * at(b);
    }
    var /= static_cast<double>(inner);
    if (var > 0.0) {
      const double inv = 1.0 / std::sqrt(var);
      for (std::size_t b = 0; b < inner; ++b) at(b) *= inv;
    }
  }
  return Dataset::make(Matrix::dense(n, p, std::move(v)), ds.y);
}

}  // namespace

Dataset normalize_rows(const Dataset& ds) { return standardize(ds, Axis::rows); }

Dataset normalize_columns(const Dataset& ds) {
  return standardize(ds, Axis::columns);
}

Dataset normalize_two_pass(const Dataset& ds) {
  return normalize_columns(normalize_rows(ds));
}

Dataset scale_to_unit_interval(const Dataset& ds) {
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  std::vector<double> v(n * p, 0.0);
  if (ds.X.is_sparse()) {
    const auto offs = ds.X.csr_row_offsets();
    const auto cols = ds.X.csr_col_indices();
    const auto vals = ds.X.csr_values();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = offs[i]; e < offs[i + 1]; ++e)
        v[i * p + cols[e]] = vals[e];
  } else {
    const auto vals = ds.X.dense_values();
    v.assign(vals.begin(), vals.end());
  }
  for (std::size_t j = 0; j < p; ++j) {
    double lo = v[j], hi = v[j];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, v[i * p + j]);
      hi = std::max(hi, v[i * p + j]);
    }
    if (hi > lo) {
      const double scale = 2.0 / (hi - lo);
      for (std::size_t i = 0; i < n; ++i)
        v[i * p + j] = (v[i * p + j] - lo) * scale - 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) v[i * p + j] = 0.0;
    }
  }
  return Dataset::make(Matrix::dense(n, p, std::move(v)), ds.y);
}

std::pair<Dataset, std::optional<Dataset>> split_rows(const Dataset& ds,
                                                      std::size_t m1) {
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  if (m1 < 1 || m1 > n) throw argument_error("split: need 1 <= m1 <= n");
  auto take = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> y(ds.y.begin() + static_cast<long>(lo),
                          ds.y.begin() + static_cast<long>(hi));
    if (!ds.X.is_sparse()) {
      const auto vals = ds.X.dense_values();
      std::vector<double> v(vals.begin() + static_cast<long>(lo * p),
                            vals.begin() + static_cast<long>(hi * p));
      return Dataset::make(Matrix::dense(hi - lo, p, std::move(v)),
                           std::move(y));
    }
    const auto offs = ds.X.csr_row_offsets();
    const auto cols = ds.X.csr_col_indices();
    const auto vals = ds.X.csr_values();
    std::vector<std::size_t> ro{0}, ci;
    std::vector<double> vv;
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t e = offs[i]; e < offs[i + 1]; ++e) {
        ci.push_back(cols[e]);
        vv.push_back(vals[e]);
      }
      ro.push_back(vv.size());
    }
    return Dataset::make(
        Matrix::csr(hi - lo, p, std::move(ro), std::move(ci), std::move(vv)),
        std::move(y));
  };
  Dataset train = take(0, m1);
  std::optional<Dataset> test;
  if (m1 < n) test = take(m1, n);
  return {std::move(train), std::move(test)};
}

void write_manifest(const PreparedData& data, const std::string& path) {
  nlohmann::json j;
  j["provenance"] = data.provenance;
  j["seed"] = data.seed;
  j["p"] = data.p;
  j["n_train"] = data.train.n();
  j["n_test"] = data.test ? data.test->n() : 0;
  if (data.truth) {
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t i = 0; i < data.truth->size(); ++i) {
      const double v = (*data.truth)[i];
      if (v != 0.0) t.push_back({{"index", i + 1}, {"value", v}});
    }
    j["truth_nonzeros"] = std::move(t);
  }
  std::ofstream out(path);
  if (!out) throw argument_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace nslr
