#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nslr/data.hpp"
#include "nslr/solver.hpp"

namespace nslr {

// Sign error rate: fraction of samples whose thresholded score disagrees
// with the label. A score of exactly 0 predicts class 0.
double ser(const Dataset& ds, const std::vector<double>& z);

// One solver run on one dataset, flattened to the reported indicators.
struct RunResult {
  std::string solver;
  std::size_t p = 0, n = 0, s = 0;
  std::optional<double> rho;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double ser_train = 0.0;
  double time_s = 0.0;  // solver loop only
  std::size_t nnz = 0;
  bool converged = false;
  std::optional<double> loss_test;
  std::optional<double> ser_test;
  SolverReport report;
};

RunResult run_single(const Dataset& train, const Dataset* test,
                     const std::string& solver_name, const SolverConfig& cfg,
                     std::uint64_t seed, std::optional<double> rho);

// Sweep declaration parsed from a key = value config file (grammar in the
// README): a data source, axis lists for p / n / s / rho, the solvers to
// run, and the trial count. Cells are the cartesian product of the axes in
// declaration order; each (cell, trial) owns a derived RNG seed.
struct BenchConfig {
  enum class Source { example1, example2, file };

  Source source = Source::example2;
  std::vector<std::size_t> p_list;
  std::vector<std::size_t> n_list;        // absolute n
  std::vector<double> n_ratio_list;       // or n = round(ratio * p)
  std::vector<std::size_t> s_list;        // absolute s
  std::vector<double> s_ratio_list;       // or s = round(ratio * p)
  std::vector<double> rho_list;           // example2 only
  std::vector<std::string> solvers{"nslr", "iht"};
  std::size_t trials = 1;
  std::uint64_t seed_base = 1;
  SolverConfig solver;                    // s is overridden per cell
  std::size_t truth_s = 0;                // ||z*||_0 override; 0 means use cell s
  std::string train_file;
  std::string test_file;
  std::string out_csv = "results.csv";
  std::string out_json;                   // empty disables

  static BenchConfig parse(std::istream& in);
  static BenchConfig parse_file(const std::string& path);
};

std::uint64_t derive_seed(std::uint64_t base, std::size_t cell,
                          std::size_t trial);

// Runs every cell, averages indicators over trials, writes one CSV row per
// (cell, solver) plus an optional JSON sidecar with the full per-trial
// traces. Returns 0 when every cell ran, 1 when all cells failed; partial
// failures are recorded in the outputs and on `log`.
int run_matrix(const BenchConfig& cfg, std::ostream& log);

// Self-check suite behind `verify`: finite-difference oracles for gradient
// and Hessian blocks, the Jacobian inverse identity, the loss bounds, the
// projection laws and the generator statistics.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_verify(std::uint64_t seed);

}  // namespace nslr
