#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nslr {

// Bad caller input: dimension mismatch, out-of-range index, invalid config.
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A mathematical precondition does not hold for the given data
// (rank-deficient column subset, X^T c = 0, ...).
struct condition_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Numerical failure at runtime: factorization broke down, iteration did not
// converge. Carries whatever partial state is useful to the caller.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what, double partial = 0.0,
                         std::vector<std::size_t> support = {})
      : std::runtime_error(what),
        partial_estimate(partial),
        support(std::move(support)) {}

  double partial_estimate;
  std::vector<std::size_t> support;
};

// Malformed input file; line numbers are 1-based.
struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}

  std::size_t line;
};

}  // namespace nslr
