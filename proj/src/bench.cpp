#include "nslr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nslr/model.hpp"

namespace nslr {

double ser(const Dataset& ds, const std::vector<double>& z) {
  const std::vector<double> m = margins(ds, z);
  double bad = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double pred = (m[i] > 0.0) ? 1.0 : 0.0;  // score 0 predicts class 0
    bad += std::fabs(ds.y[i] - pred);
  }
  return bad / static_cast<double>(ds.n());
}

RunResult run_single(const Dataset& train, const Dataset* test,
                     const std::string& solver_name, const SolverConfig& cfg,
                     std::uint64_t seed, std::optional<double> rho) {
  SolverReport rep;
  if (solver_name == "nslr") {
    rep = nslr_solve(train, cfg);
  } else if (solver_name == "iht") {
    rep = iht_solve(train, cfg);
  } else {
    throw argument_error("unknown solver '" + solver_name + "'");
  }
  RunResult r;
  r.solver = solver_name;
  r.p = train.p();
  r.n = train.n();
  r.s = cfg.s;
  r.rho = rho;
  r.seed = seed;
  r.loss = rep.final_loss;
  r.grad_norm = rep.final_grad_norm;
  r.ser_train = ser(train, rep.z_final);
  r.time_s = rep.solve_seconds;
  r.nnz = rep.nnz;
  r.converged = rep.converged;
  if (test != nullptr) {
    r.loss_test = loss(*test, rep.z_final);
    r.ser_test = ser(*test, rep.z_final);
  }
  r.report = std::move(rep);
  return r;
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t cell,
                          std::size_t trial) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (cell + 1) +
                    0xC2B2AE3D27D4EB4FULL * (trial + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& t : out) {
    const auto b = t.find_first_not_of(" \t");
    const auto e = t.find_last_not_of(" \t");
    t = (b == std::string::npos) ? "" : t.substr(b, e - b + 1);
  }
  out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw argument_error("config: bad number '" + s + "' for " + key);
  return v;
}

std::size_t to_size(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v < 0 || v != std::floor(v))
    throw argument_error("config: expected a nonnegative integer for " + key);
  return static_cast<std::size_t>(v);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Cell {
  std::size_t index = 0;
  std::size_t p = 0, n = 0, s = 0;
  std::optional<double> rho;
};

std::vector<Cell> enumerate_cells(const BenchConfig& cfg) {
  std::vector<Cell> cells;
  if (cfg.source == BenchConfig::Source::file) {
    cells.push_back(Cell{0, 0, 0, cfg.s_list.empty() ? 0 : cfg.s_list[0],
                         std::nullopt});
    return cells;
  }
  const bool use_ratio_n = !cfg.n_ratio_list.empty();
  const bool use_ratio_s = !cfg.s_ratio_list.empty();
  const std::size_t n_axis =
      use_ratio_n ? cfg.n_ratio_list.size() : cfg.n_list.size();
  const std::size_t s_axis =
      use_ratio_s ? cfg.s_ratio_list.size() : cfg.s_list.size();
  std::vector<std::optional<double>> rhos;
  if (cfg.source == BenchConfig::Source::example2) {
    for (double r : cfg.rho_list) rhos.emplace_back(r);
  } else {
    rhos.emplace_back(std::nullopt);
  }
  std::size_t idx = 0;
  for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi)
    for (std::size_t ni = 0; ni < n_axis; ++ni)
      for (std::size_t si = 0; si < s_axis; ++si)
        for (const auto& rho : rhos) {
          Cell c;
          c.index = idx++;
          c.p = cfg.p_list[pi];
          c.n = use_ratio_n ? static_cast<std::size_t>(
                                  std::llround(cfg.n_ratio_list[ni] *
                                               static_cast<double>(c.p)))
                            : cfg.n_list[ni];
          c.s = use_ratio_s ? static_cast<std::size_t>(
                                  std::llround(cfg.s_ratio_list[si] *
                                               static_cast<double>(c.p)))
                            : cfg.s_list[si];
          c.rho = rho;
          cells.push_back(c);
        }
  return cells;
}

}  // namespace

BenchConfig BenchConfig::parse(std::istream& in) {
  BenchConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw parse_error("expected key = value", line_no);
    auto trim = [](std::string t) {
      const auto x = t.find_first_not_of(" \t\r");
      const auto y = t.find_last_not_of(" \t\r");
      return (x == std::string::npos) ? std::string{} : t.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw parse_error("empty key or value", line_no);
    kv[key] = val;
  }

  auto has = [&](const char* k) { return kv.count(k) > 0; };
  if (has("generator")) {
    const std::string g = kv["generator"];
    if (g == "example1") cfg.source = Source::example1;
    else if (g == "example2") cfg.source = Source::example2;
    else if (g == "file") cfg.source = Source::file;
    else throw argument_error("config: unknown generator '" + g + "'");
  }
  auto size_list = [&](const char* k) {
    std::vector<std::size_t> out;
    for (const auto& t : split_list(kv[k])) out.push_back(to_size(t, k));
    return out;
  };
  auto double_list = [&](const char* k) {
    std::vector<double> out;
    for (const auto& t : split_list(kv[k])) out.push_back(to_double(t, k));
    return out;
  };
  if (has("p")) cfg.p_list = size_list("p");
  if (has("n")) cfg.n_list = size_list("n");
  if (has("n_ratio")) cfg.n_ratio_list = double_list("n_ratio");
  if (has("s")) cfg.s_list = size_list("s");
  if (has("s_ratio")) cfg.s_ratio_list = double_list("s_ratio");
  if (has("rho")) cfg.rho_list = double_list("rho");
  if (has("solvers")) cfg.solvers = split_list(kv["solvers"]);
  if (has("trials")) cfg.trials = to_size(kv["trials"], "trials");
  if (has("seed_base"))
    cfg.seed_base = static_cast<std::uint64_t>(to_size(kv["seed_base"], "seed_base"));
  if (has("truth_s")) cfg.truth_s = to_size(kv["truth_s"], "truth_s");
  if (has("tau0")) cfg.solver.tau0 = to_double(kv["tau0"], "tau0");
  if (has("tau_decay")) cfg.solver.tau_decay = to_double(kv["tau_decay"], "tau_decay");
  if (has("epsilon")) cfg.solver.epsilon = to_double(kv["epsilon"], "epsilon");
  if (has("max_iter")) cfg.solver.max_iter = to_size(kv["max_iter"], "max_iter");
  if (has("ridge_mu")) cfg.solver.ridge_mu = to_double(kv["ridge_mu"], "ridge_mu");
  if (has("train_file")) cfg.train_file = kv["train_file"];
  if (has("test_file")) cfg.test_file = kv["test_file"];
  if (has("out_csv")) cfg.out_csv = kv["out_csv"];
  if (has("out_json")) cfg.out_json = kv["out_json"];

  if (cfg.source == Source::file) {
    if (cfg.train_file.empty())
      throw argument_error("config: generator=file needs train_file");
    if (cfg.s_list.size() != 1)
      throw argument_error("config: generator=file needs exactly one s");
  } else {
    if (cfg.p_list.empty()) throw argument_error("config: p is required");
    if (cfg.n_list.empty() == cfg.n_ratio_list.empty())
      throw argument_error("config: give exactly one of n / n_ratio");
    if (cfg.s_list.empty() == cfg.s_ratio_list.empty())
      throw argument_error("config: give exactly one of s / s_ratio");
    if (cfg.source == Source::example2 && cfg.rho_list.empty())
      cfg.rho_list = {0.5};
  }
  if (cfg.solvers.empty()) throw argument_error("config: no solvers listed");
  if (cfg.trials < 1) throw argument_error("config: trials must be >= 1");
  return cfg;
}

BenchConfig BenchConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw argument_error("cannot open '" + path + "'");
  return parse(in);
}

int run_matrix(const BenchConfig& cfg, std::ostream& log) {
  const std::vector<Cell> cells = enumerate_cells(cfg);
  nlohmann::json jcells = nlohmann::json::array();
  std::ostringstream csv;
  csv << "p,n,s,rho,solver,loss,grad_norm,ser,time_s,nnz,converged\n";

  // File-backed data is loaded once and shared across trials.
  std::optional<Dataset> file_train, file_test;
  if (cfg.source == BenchConfig::Source::file) {
    file_train = parse_libsvm_file(cfg.train_file);
    if (!cfg.test_file.empty())
      file_test = parse_libsvm_file(cfg.test_file, file_train->p());
  }

  std::size_t failed_cells = 0;
  for (const Cell& cell : cells) {
    nlohmann::json jc;
    nlohmann::json jconfig{{"trials", cfg.trials}, {"seed_base", cfg.seed_base}};
    if (cfg.source == BenchConfig::Source::file) {
      jconfig["train_file"] = cfg.train_file;
      jconfig["s"] = cell.s;
    } else {
      jconfig["p"] = cell.p;
      jconfig["n"] = cell.n;
      jconfig["s"] = cell.s;
      if (cell.rho) jconfig["rho"] = *cell.rho;
      jconfig["generator"] =
          cfg.source == BenchConfig::Source::example1 ? "example1" : "example2";
    }
    jc["config"] = jconfig;
    nlohmann::json jtrials = nlohmann::json::array();

    struct Sums {
      double loss = 0, grad = 0, ser = 0, time = 0, nnz = 0, conv = 0;
      std::size_t count = 0;
    };
    std::map<std::string, Sums> agg;
    std::size_t cell_errors = 0, cell_runs = 0;

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t seed = derive_seed(cfg.seed_base, cell.index, trial);
      std::optional<PreparedData> gen;
      const Dataset* train = nullptr;
      const Dataset* test = nullptr;
      std::string gen_error;
      try {
        if (cfg.source == BenchConfig::Source::file) {
          train = &*file_train;
          if (file_test) test = &*file_test;
        } else if (cfg.source == BenchConfig::Source::example1) {
          gen = gen_example1(Spec1{cell.n, cell.p, seed});
          train = &gen->train;
        } else {
          const std::size_t strue = cfg.truth_s > 0 ? cfg.truth_s : cell.s;
          gen = gen_example2(Spec2{cell.n, cell.p, strue, *cell.rho, seed});
          train = &gen->train;
        }
      } catch (const std::exception& e) {
        gen_error = e.what();
      }

      for (const std::string& solver_name : cfg.solvers) {
        ++cell_runs;
        nlohmann::json jt{{"solver", solver_name}, {"trial", trial}, {"seed", seed}};
        if (!gen_error.empty()) {
          jt["error"] = gen_error;
          ++cell_errors;
          jtrials.push_back(std::move(jt));
          continue;
        }
        try {
          SolverConfig scfg = cfg.solver;
          scfg.s = cell.s;
          RunResult r = run_single(*train, test, solver_name, scfg, seed, cell.rho);
          nlohmann::json ind{{"loss", r.loss},        {"grad_norm", r.grad_norm},
                             {"ser", r.ser_train},    {"time_s", r.time_s},
                             {"nnz", r.nnz},          {"converged", r.converged}};
          if (r.loss_test) ind["loss_test"] = *r.loss_test;
          if (r.ser_test) ind["ser_test"] = *r.ser_test;
          jt["indicators"] = std::move(ind);
          nlohmann::json jtrace = nlohmann::json::array();
          for (const TraceRecord& t : r.report.trace) {
            nlohmann::json row{{"iter", t.iter},
                               {"residual", t.residual},
                               {"tau", t.tau},
                               {"loss", t.loss},
                               {"grad_norm", t.grad_norm},
                               {"seconds", t.seconds},
                               {"tie", t.tie_at_boundary}};
            nlohmann::json sup = nlohmann::json::array();
            for (std::size_t j : t.support) sup.push_back(j + 1);  // 1-based
            row["support"] = std::move(sup);
            jtrace.push_back(std::move(row));
          }
          jt["trace"] = std::move(jtrace);
          if (!r.report.error.empty()) jt["solver_error"] = r.report.error;

          Sums& sums = agg[solver_name];
          sums.loss += r.loss;
          sums.grad += r.grad_norm;
          sums.ser += r.ser_train;
          sums.time += r.time_s;
          sums.nnz += static_cast<double>(r.nnz);
          sums.conv += r.converged ? 1.0 : 0.0;
          sums.count += 1;
        } catch (const std::exception& e) {
          jt["error"] = e.what();
          ++cell_errors;
          log << "cell " << cell.index << " trial " << trial << " solver "
              << solver_name << " failed: " << e.what() << '\n';
        }
        jtrials.push_back(std::move(jt));
      }
    }

    jc["trials"] = std::move(jtrials);
    jcells.push_back(std::move(jc));
    if (cell_errors == cell_runs) ++failed_cells;

    for (const std::string& solver_name : cfg.solvers) {
      const auto it = agg.find(solver_name);
      csv << (cfg.source == BenchConfig::Source::file ? file_train->p() : cell.p)
          << ',' << (cfg.source == BenchConfig::Source::file ? file_train->n() : cell.n)
          << ',' << cell.s << ',';
      if (cell.rho) csv << format_double(*cell.rho);
      csv << ',' << solver_name << ',';
      if (it == agg.end() || it->second.count == 0) {
        csv << "nan,nan,nan,nan,nan,nan\n";
        continue;
      }
      const Sums& s = it->second;
      const double cnt = static_cast<double>(s.count);
      csv << format_double(s.loss / cnt) << ',' << format_double(s.grad / cnt)
          << ',' << format_double(s.ser / cnt) << ','
          << format_double(s.time / cnt) << ',' << format_double(s.nnz / cnt)
          << ',' << format_double(s.conv / cnt) << '\n';
    }
  }

  {
    std::ofstream out(cfg.out_csv);
    if (!out) throw argument_error("cannot write '" + cfg.out_csv + "'");
    out << csv.str();
  }
  if (!cfg.out_json.empty()) {
    nlohmann::json root{{"cells", std::move(jcells)}};
    std::ofstream out(cfg.out_json);
    if (!out) throw argument_error("cannot write '" + cfg.out_json + "'");
    out << root.dump(2) << '\n';
  }
  return (failed_cells == cells.size()) ? 1 : 0;
}

}  // namespace nslr
