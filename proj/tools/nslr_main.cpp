#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nslr/bench.hpp"
#include "nslr/data.hpp"
#include "nslr/model.hpp"
#include "nslr/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text_report(std::ostream& out, const nslr::RunResult& r) {
  out << "solver      " << r.solver << '\n'
      << "p           " << r.p << '\n'
      << "n           " << r.n << '\n'
      << "s           " << r.s << '\n'
      << "loss        " << fmt(r.loss) << '\n'
      << "grad_norm   " << fmt(r.grad_norm) << '\n'
      << "ser         " << fmt(r.ser_train) << '\n'
      << "time_s      " << fmt(r.time_s) << '\n'
      << "nnz         " << r.nnz << '\n'
      << "iterations  " << r.report.iterations << '\n'
      << "converged   " << (r.converged ? "yes" : "no") << '\n'
      << "stationary  " << nslr::to_string(r.report.stationarity_class)
      << (r.report.tie_flag ? " (conditional on tie set)" : "") << '\n';
  if (r.report.global_minimizer) out << "certificate global minimizer\n";
  if (r.loss_test) out << "loss_test   " << fmt(*r.loss_test) << '\n';
  if (r.ser_test) out << "ser_test    " << fmt(*r.ser_test) << '\n';
}

void write_csv_report(std::ostream& out, const nslr::RunResult& r) {
  out << "p,n,s,rho,solver,loss,grad_norm,ser,time_s,nnz,converged\n"
      << r.p << ',' << r.n << ',' << r.s << ',';
  if (r.rho) out << fmt(*r.rho);
  out << ',' << r.solver << ',' << fmt(r.loss) << ',' << fmt(r.grad_norm)
      << ',' << fmt(r.ser_train) << ',' << fmt(r.time_s) << ',' << r.nnz
      << ',' << (r.converged ? 1 : 0) << '\n';
}

void write_json_report(std::ostream& out, const nslr::RunResult& r) {
  nlohmann::json j{{"solver", r.solver},
                   {"p", r.p},
                   {"n", r.n},
                   {"s", r.s},
                   {"seed", r.seed},
                   {"loss", r.loss},
                   {"grad_norm", r.grad_norm},
                   {"ser", r.ser_train},
                   {"time_s", r.time_s},
                   {"nnz", r.nnz},
                   {"iterations", r.report.iterations},
                   {"converged", r.converged},
                   {"stationarity", nslr::to_string(r.report.stationarity_class)},
                   {"tie_at_boundary", r.report.tie_flag},
                   {"global_minimizer", r.report.global_minimizer},
                   {"final_tau", r.report.final_tau},
                   {"final_residual", r.report.final_residual}};
  if (r.rho) j["rho"] = *r.rho;
  if (r.loss_test) j["loss_test"] = *r.loss_test;
  if (r.ser_test) j["ser_test"] = *r.ser_test;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.report.trace) {
    nlohmann::json row{{"iter", t.iter},         {"residual", t.residual},
                       {"tau", t.tau},           {"loss", t.loss},
                       {"grad_norm", t.grad_norm}, {"seconds", t.seconds},
                       {"tie", t.tie_at_boundary}};
    nlohmann::json sup = nlohmann::json::array();
    for (std::size_t idx : t.support) sup.push_back(idx + 1);  // 1-based in logs
    row["support"] = std::move(sup);
    trace.push_back(std::move(row));
  }
  j["trace"] = std::move(trace);
  out << j.dump(2) << '\n';
}

struct SolveArgs {
  std::string data_path;
  std::string test_path;
  std::string solver = "nslr";
  std::string normalize = "none";
  std::string format = "text";
  std::string out_path;
  std::size_t s = 0;
  std::size_t p_override = 0;
  nslr::SolverConfig cfg;
};

int do_solve(const SolveArgs& a) {
  nslr::Dataset train = nslr::parse_libsvm_file(a.data_path, a.p_override);
  std::optional<nslr::Dataset> test;
  if (!a.test_path.empty())
    test = nslr::parse_libsvm_file(a.test_path, train.p());

  if (a.s < 1 || a.s > train.p()) {
    std::cerr << "error: --s must lie in [1, p] (p = " << train.p() << ")\n";
    return kExitUsage;
  }
  if (a.normalize == "standardize") {
    train = nslr::normalize_two_pass(nslr::densify(train));
    if (test) test = nslr::normalize_two_pass(nslr::densify(*test));
  } else if (a.normalize == "minmax") {
    train = nslr::scale_to_unit_interval(train);
    if (test) test = nslr::scale_to_unit_interval(*test);
  } else if (a.normalize != "none") {
    std::cerr << "error: unknown --normalize mode\n";
    return kExitUsage;
  }

  nslr::SolverConfig cfg = a.cfg;
  cfg.s = a.s;
  nslr::RunResult r = nslr::run_single(train, test ? &*test : nullptr,
                                       a.solver, cfg, 0, std::nullopt);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) {
      std::cerr << "error: cannot write '" << a.out_path << "'\n";
      return kExitUsage;
    }
    out = &file;
  }
  if (a.format == "csv") {
    write_csv_report(*out, r);
  } else if (a.format == "json") {
    write_json_report(*out, r);
  } else {
    write_text_report(*out, r);
  }
  if (!r.report.error.empty()) {
    std::cerr << "solver error: " << r.report.error << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton solver and benchmark harness for "
               "sparsity-constrained logistic regression"};
  app.require_subcommand(1);

  // gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "emit a synthetic dataset as LIBSVM text");
  int gen_example = 2;
  std::size_t gen_n = 100, gen_p = 200, gen_s = 10;
  double gen_rho = 0.5;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--example", gen_example, "generator family: 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  gen->add_option("--n", gen_n, "samples");
  gen->add_option("--p", gen_p, "features");
  gen->add_option("--s", gen_s, "nonzeros of the ground truth (example 2)");
  gen->add_option("--rho", gen_rho, "feature correlation (example 2)");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output path")->required();

  // solve --------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "run one solver on one dataset");
  SolveArgs sa;
  solve->add_option("data", sa.data_path, "LIBSVM dataset")->required();
  solve->add_option("--test", sa.test_path, "LIBSVM test split");
  solve->add_option("--s", sa.s, "sparsity level")->required();
  solve->add_option("--solver", sa.solver, "nslr or iht")
      ->check(CLI::IsMember({"nslr", "iht"}));
  solve->add_option("--p", sa.p_override, "feature-count override");
  solve->add_option("--tau0", sa.cfg.tau0, "initial tau");
  solve->add_option("--tau-decay", sa.cfg.tau_decay, "tau decay factor");
  solve->add_option("--eps", sa.cfg.epsilon, "residual tolerance");
  solve->add_option("--max-iter", sa.cfg.max_iter, "iteration cap");
  solve->add_option("--ridge", sa.cfg.ridge_mu, "ridge fallback mu");
  solve->add_option("--normalize", sa.normalize, "none | standardize | minmax");
  solve->add_option("--format", sa.format, "text | csv | json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  solve->add_option("--out", sa.out_path, "write the report here instead of stdout");

  // bench --------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "run a sweep from a config file");
  std::string bench_config;
  bench->add_option("config", bench_config, "key = value config file")->required();

  // verify -------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run the built-in oracle checks");
  std::uint64_t verify_seed = 7;
  verify->add_option("--seed", verify_seed, "RNG seed for the checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      nslr::PreparedData data =
          (gen_example == 1)
              ? nslr::gen_example1(nslr::Spec1{gen_n, gen_p, gen_seed})
              : nslr::gen_example2(
                    nslr::Spec2{gen_n, gen_p, gen_s, gen_rho, gen_seed});
      nslr::serialize_libsvm_file(data.train, gen_out);
      nslr::write_manifest(data, gen_out + ".manifest.json");
      std::cout << data.provenance << " -> " << gen_out << '\n';
      return kExitOk;
    }
    if (solve->parsed()) return do_solve(sa);
    if (bench->parsed()) {
      const nslr::BenchConfig cfg = nslr::BenchConfig::parse_file(bench_config);
      return nslr::run_matrix(cfg, std::cerr) == 0 ? kExitOk : kExitNumeric;
    }
    if (verify->parsed()) {
      const auto checks = nslr::run_verify(verify_seed);
      bool all = true;
      for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail
                  << ")\n";
        all = all && c.pass;
      }
      std::cout << (all ? "all checks passed\n" : "some checks FAILED\n");
      return all ? kExitOk : kExitNumeric;
    }
  } catch (const nslr::argument_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nslr::parse_error& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nslr::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
