#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nslr/bench.hpp"
#include "nslr/model.hpp"

using namespace nslr;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rows with the time_s column blanked out; timing is the one field that
// legitimately varies between otherwise identical runs.
std::string mask_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    fields.push_back(cur);
    if (fields.size() > 8) fields[8] = "";
    for (std::size_t i = 0; i < fields.size(); ++i)
      out << (i ? "," : "") << fields[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("ser") {
  SUBCASE("zero classifier predicts class 0 everywhere") {
    const Dataset ds = Dataset::make(
        Matrix::dense(4, 2, {1, 0, 2, 0, 3, 0, 4, 0}), {1, 0, 1, 1});
    CHECK(ser(ds, {0, 0}) == doctest::Approx(0.75));  // mean(y)
  }

  SUBCASE("a separating direction scores zero") {
    const Dataset ds = Dataset::make(
        Matrix::dense(3, 1, {2, -1, 3}), {1, 0, 1});
    CHECK(ser(ds, {1.0}) == 0.0);
  }

  SUBCASE("hand count") {
    // y = (0,1,1), scores = (-1, 2, -3) -> one mistake out of three
    const Dataset ds = Dataset::make(
        Matrix::dense(3, 1, {-1, 2, -3}), {0, 1, 1});
    CHECK(ser(ds, {1.0}) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("bench config parsing") {
  SUBCASE("axes, lists and solver settings") {
    std::istringstream in(
        "# sweep\n"
        "generator = example2\n"
        "p = 100, 200\n"
        "n_ratio = 0.5\n"
        "s = 5\n"
        "rho = 0.0, 0.5\n"
        "solvers = nslr, iht\n"
        "trials = 3\n"
        "seed_base = 11\n"
        "epsilon = 1e-7\n"
        "out_csv = /tmp/x.csv\n");
    const BenchConfig cfg = BenchConfig::parse(in);
    CHECK(cfg.p_list == std::vector<std::size_t>{100, 200});
    CHECK(cfg.n_ratio_list == std::vector<double>{0.5});
    CHECK(cfg.rho_list == std::vector<double>{0.0, 0.5});
    CHECK(cfg.solvers == std::vector<std::string>{"nslr", "iht"});
    CHECK(cfg.trials == 3);
    CHECK(cfg.seed_base == 11);
    CHECK(cfg.solver.epsilon == doctest::Approx(1e-7));
  }

  SUBCASE("n and n_ratio are mutually exclusive") {
    std::istringstream in(
        "generator = example2\np = 100\nn = 20\nn_ratio = 0.2\ns = 5\n");
    CHECK_THROWS_AS(BenchConfig::parse(in), argument_error);
  }

  SUBCASE("missing axes are rejected") {
    std::istringstream in("generator = example2\nn = 20\ns = 5\n");
    CHECK_THROWS_AS(BenchConfig::parse(in), argument_error);
  }
}

TEST_CASE("run_matrix emits the contracted CSV and JSON") {
  const std::string csv_path = "/tmp/nslr_test_results.csv";
  const std::string json_path = "/tmp/nslr_test_results.json";
  std::istringstream in(
      "generator = example2\n"
      "p = 60\n"
      "n = 40\n"
      "s = 4\n"
      "rho = 0.5\n"
      "solvers = nslr\n"
      "trials = 1\n"
      "seed_base = 5\n");
  BenchConfig cfg = BenchConfig::parse(in);
  cfg.out_csv = csv_path;
  cfg.out_json = json_path;

  std::ostringstream log;
  REQUIRE(run_matrix(cfg, log) == 0);

  SUBCASE("header and one data row") {
    std::istringstream csv(slurp(csv_path));
    std::string header, row, extra;
    REQUIRE(std::getline(csv, header));
    CHECK(header == "p,n,s,rho,solver,loss,grad_norm,ser,time_s,nnz,converged");
    REQUIRE(std::getline(csv, row));
    CHECK(row.substr(0, 14) == "60,40,4,0.5,ns");
    CHECK_FALSE(std::getline(csv, extra));
  }

  SUBCASE("JSON sidecar carries config, indicators and trace") {
    const nlohmann::json j = nlohmann::json::parse(slurp(json_path));
    REQUIRE(j.contains("cells"));
    REQUIRE(j["cells"].size() == 1);
    const auto& cell = j["cells"][0];
    CHECK(cell["config"]["p"] == 60);
    REQUIRE(cell["trials"].size() == 1);
    const auto& trial = cell["trials"][0];
    CHECK(trial["solver"] == "nslr");
    CHECK(trial["indicators"].contains("loss"));
    CHECK(trial["trace"].size() >= 1);
    CHECK(trial["trace"][0].contains("residual"));
    CHECK(trial["trace"][0]["support"].size() == 4);
  }

  std::remove(csv_path.c_str());
  std::remove(json_path.c_str());
}

TEST_CASE("two solvers times three trials average into two rows") {
  const std::string csv_path = "/tmp/nslr_test_avg.csv";
  std::istringstream in(
      "generator = example2\n"
      "p = 50\nn = 30\ns = 3\nrho = 0.3\n"
      "solvers = nslr, iht\n"
      "trials = 3\n"
      "seed_base = 2\n"
      "max_iter = 150\n");
  BenchConfig cfg = BenchConfig::parse(in);
  cfg.out_csv = csv_path;
  std::ostringstream log;
  REQUIRE(run_matrix(cfg, log) == 0);
  std::istringstream csv(slurp(csv_path));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);  // header + one row per solver
  CHECK(rows[1].find("nslr") != std::string::npos);
  CHECK(rows[2].find("iht") != std::string::npos);
  std::remove(csv_path.c_str());
}

TEST_CASE("CSV output is stable across identical runs, timing aside") {
  auto run_once = [](const std::string& path) {
    std::istringstream in(
        "generator = example2\n"
        "p = 40, 80\nn_ratio = 0.5\ns_ratio = 0.1\nrho = 0.5\n"
        "solvers = nslr, iht\n"
        "trials = 2\nseed_base = 21\n");
    BenchConfig cfg = BenchConfig::parse(in);
    cfg.out_csv = path;
    std::ostringstream log;
    REQUIRE(run_matrix(cfg, log) == 0);
    return slurp(path);
  };
  const std::string a = run_once("/tmp/nslr_stable_a.csv");
  const std::string b = run_once("/tmp/nslr_stable_b.csv");
  CHECK(mask_time_column(a) == mask_time_column(b));
  std::remove("/tmp/nslr_stable_a.csv");
  std::remove("/tmp/nslr_stable_b.csv");
}

TEST_CASE("all cells failing yields a nonzero status with recorded errors") {
  const std::string csv_path = "/tmp/nslr_test_fail.csv";
  const std::string json_path = "/tmp/nslr_test_fail.json";
  std::istringstream in(
      "generator = example2\n"
      "p = 10\nn = 8\ns = 20\n"  // s > p: every trial fails to generate
      "solvers = nslr\ntrials = 2\n");
  BenchConfig cfg = BenchConfig::parse(in);
  cfg.out_csv = csv_path;
  cfg.out_json = json_path;
  std::ostringstream log;
  CHECK(run_matrix(cfg, log) == 1);
  const nlohmann::json j = nlohmann::json::parse(slurp(json_path));
  CHECK(j["cells"][0]["trials"][0].contains("error"));
  std::remove(csv_path.c_str());
  std::remove(json_path.c_str());
}

TEST_CASE("test split indicators come from the held-out rows only") {
  const PreparedData gen = gen_example2(Spec2{60, 30, 3, 0.4, 31});
  const auto [train, test] = split_rows(gen.train, 40);
  REQUIRE(test.has_value());
  SolverConfig cfg;
  cfg.s = 3;
  const RunResult r = run_single(train, &*test, "nslr", cfg, 31, 0.4);
  REQUIRE(r.loss_test.has_value());
  REQUIRE(r.ser_test.has_value());
  CHECK(*r.loss_test == doctest::Approx(loss(*test, r.report.z_final)));
  CHECK(*r.ser_test == doctest::Approx(ser(*test, r.report.z_final)));
}

TEST_CASE("verify suite passes on a fresh tree") {
  const auto checks = run_verify(7);
  for (const auto& c : checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
}
