#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nslr/matrix.hpp"

namespace nslr {

// Independent-feature generator: labels split half/half at random, then
//   x_i = y_i v_i 1 + w_i,   v_i ~ N(0,1), w_i ~ N(0, I_p),
// so class-1 rows share a common N(0,1) shift across all features.
struct Spec1 {
  std::size_t n = 0;  // >= 2 so both classes are nonempty
  std::size_t p = 0;
  std::uint64_t seed = 0;
};

// Correlated-feature generator: each row follows the AR(1) recursion
//   x_{i,1} ~ N(0,1),  x_{i,j+1} = rho x_{i,j} + sqrt(1-rho^2) v_{i,j},
// the ground truth z* has s standard-Gaussian nonzeros at uniform random
// positions, and labels are Bernoulli with Pr{y=1 | x} = sigmoid(<x, z*>).
struct Spec2 {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t s = 0;     // 1 <= s <= p, exact ||z*||_0
  double rho = 0.0;      // in [0, 1]
  std::uint64_t seed = 0;
};

struct PreparedData {
  Dataset train;
  std::optional<Dataset> test;
  std::size_t p = 0;
  std::string provenance;
  std::optional<std::vector<double>> truth;  // z*, synthetic correlated data only
  std::uint64_t seed = 0;
};

// Both generators are bit-deterministic given the seed (see rng.hpp for the
// exact stream contract). Draw order, for replication: example 1 shuffles
// the row permutation, then per row draws v_i then w_i1..w_ip; example 2
// draws the support positions, then the s values of z*, then the features
// row-major, then the n label uniforms.
PreparedData gen_example1(const Spec1& spec);
PreparedData gen_example2(const Spec2& spec);

// LIBSVM text: `<label> <idx>:<val> ...`, indices 1-based and strictly
// increasing per line, labels drawn from {-1, 0, +1} or {1, 2}. p defaults
// to the largest index seen; pass p_override to widen it (e.g. to keep
// train/test aligned). Malformed input throws parse_error with the line.
Dataset parse_libsvm(std::istream& in, std::size_t p_override = 0);
Dataset parse_libsvm_file(const std::string& path, std::size_t p_override = 0);

// Emits the same grammar with %.17g values and the mapped {0,1} labels, so
// parse(serialize(ds)) reproduces ds exactly (explicit zeros are dropped).
void serialize_libsvm(const Dataset& ds, std::ostream& out);
void serialize_libsvm_file(const Dataset& ds, const std::string& path);

// Two-value label alphabet -> {0,1}: the smaller raw value becomes 0, so
// {-1,+1} maps to {0,1}. More than two distinct values is an error.
std::vector<double> map_labels(const std::vector<double>& raw);

// Dense copy of a sparse dataset (pass-through when already dense).
Dataset densify(const Dataset& ds);

// Sample-wise then feature-wise standardization to mean zero, unit
// population variance; zero-variance rows/columns are centered, not scaled.
// Dense matrices only.
Dataset normalize_rows(const Dataset& ds);
Dataset normalize_columns(const Dataset& ds);
Dataset normalize_two_pass(const Dataset& ds);

// Per-column affine map onto [-1, 1]; constant columns go to 0. Output is
// dense (the map does not preserve sparsity).
Dataset scale_to_unit_interval(const Dataset& ds);

// First m1 rows as train, remainder as test (empty when m1 == n). For
// datasets distributed as separate train/test files, parse them separately
// instead.
std::pair<Dataset, std::optional<Dataset>> split_rows(const Dataset& ds,
                                                      std::size_t m1);

// JSON sidecar recording provenance, seed, generator spec and split sizes.
void write_manifest(const PreparedData& data, const std::string& path);

}  // namespace nslr
