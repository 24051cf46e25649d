// End-to-end checks of the command-line tool: exit codes, file outputs, and
// the diagnostics format. The binary path is injected by the build as
// KHESS_CLI_BIN.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out, err;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("khess_cli_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir,
                  const std::string& env = "") {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string("\"") + KHESS_CLI_BIN + "\" " + args + " > \"" +
         out.string() + "\" 2> \"" + err.string() + "\"";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

}  // namespace

TEST_CASE("help and argument errors use the conventional exit codes", "[cli]") {
  const fs::path dir = fresh_dir();
  REQUIRE(run_cli("--help", dir).exit_code == 0);
  REQUIRE(run_cli("solve --help", dir).exit_code == 0);
  REQUIRE(run_cli("", dir).exit_code == 1);             // missing subcommand
  REQUIRE(run_cli("solve --bogus 1", dir).exit_code == 1);
  REQUIRE(run_cli("frobnicate", dir).exit_code == 1);

  const CliResult badn = run_cli("solve --N 4", dir);
  REQUIRE(badn.exit_code == 1);
  REQUIRE(badn.err.find("N must be 2 or 3") != std::string::npos);
}

TEST_CASE("solving the zero problem writes zero curves", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r = run_cli("solve --lambda 0 --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);

  const fs::path sol = dir / "solution_N2_dirichlet_lambda0.csv";
  const fs::path diag = dir / "diagnostics_N2_dirichlet_lambda0.json";
  const fs::path prof = dir / "profile_N2_dirichlet_lambda0.csv";
  REQUIRE(fs::exists(sol));
  REQUIRE(fs::exists(diag));
  REQUIRE(fs::exists(prof));

  std::istringstream in(read_file(sol));
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "t,w,w_prime");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    REQUIRE(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr) ==
            0.0);
    ++rows;
  }
  REQUIRE(rows == 4001);

  const json j = json::parse(read_file(diag));
  REQUIRE(j.at("converged") == true);
  REQUIRE(j.at("lambda") == 0.0);
  REQUIRE(j.at("picard").at("converged") == true);
  REQUIRE(j.at("picard").at("iterations") == 1);
}

TEST_CASE("the two methods agree and the run reports it", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r = run_cli(
      "solve --lambda 0.1 --method both --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);

  const json j =
      json::parse(read_file(dir / "diagnostics_N2_dirichlet_lambda0.1.json"));
  REQUIRE(j.at("picard").at("converged") == true);
  REQUIRE(j.at("monotone").at("converged") == true);
  REQUIRE(j.at("monotone").at("ordering_violation").get<double>() >= -1e-12);
  REQUIRE(j.at("agreement").is_number());
  REQUIRE(j.at("agreement").get<double>() <= 1e-6);
  REQUIRE(j.at("converged") == true);
  REQUIRE(fs::exists(dir / "profile_N2_dirichlet_lambda0.1.csv"));
}

TEST_CASE("a multiplier without an upper solution degrades gracefully", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r = run_cli(
      "solve --lambda 0.6 --method both --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 2);

  const json j =
      json::parse(read_file(dir / "diagnostics_N2_dirichlet_lambda0.6.json"));
  REQUIRE(j.at("picard").at("converged") == true);
  REQUIRE(j.at("monotone").contains("error"));
  REQUIRE(j.at("converged") == false);
}

TEST_CASE("bounds reports the full threshold table", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r = run_cli("bounds --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);

  const json j = json::parse(read_file(dir / "bounds_N2_dirichlet_one.json"));
  REQUIRE(j.at("lambda_cond2").get<double>() == Catch::Approx(0.5).margin(1e-9));
  REQUIRE(j.at("c_prime").get<double>() ==
          Catch::Approx(1.0 / 3.0).margin(1e-9));
  REQUIRE(j.at("c_const").get<double>() ==
          Catch::Approx(1.0 / 1080.0).margin(1e-11));
  REQUIRE(j.at("lambda_nonexist").get<double>() ==
          Catch::Approx(360.0).epsilon(1e-6));
  const json& cls = j.at("classification");
  REQUIRE(cls.at("existence_sufficient")[0] == "-inf");
  REQUIRE(cls.at("nonexistence")[1] == "+inf");
  REQUIRE(cls.at("unknown")[0] == cls.at("existence_sufficient")[1]);
  REQUIRE(cls.at("unknown")[1] == cls.at("nonexistence")[0]);
}

TEST_CASE("bounds degrades to the smallness condition for degenerate data",
          "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r =
      run_cli("bounds --g zero --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 2);

  const json j = json::parse(read_file(dir / "bounds_N2_dirichlet_zero.json"));
  REQUIRE(j.at("lambda_cond2") == "+inf");
  REQUIRE(j.at("c_prime").is_null());
  REQUIRE(j.at("lambda_nonexist").is_null());
  REQUIRE(j.at("note").get<std::string>().find("inapplicable") !=
          std::string::npos);
}

TEST_CASE("sweep classifies a lambda list and records the oracle", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r = run_cli(
      "sweep --lambdas -10,0,0.1 --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);

  std::istringstream in(read_file(dir / "sweep_N2_dirichlet_one.csv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line ==
          "lambda,classification,picard_converged,monotone_converged,residual,"
          "oracle_init");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    REQUIRE(cells[1] == "existence_sufficient");
    REQUIRE(cells[2] == "true");
    REQUIRE(cells[3] == "true");
    REQUIRE(cells[5] != "none");
    const double init = std::strtod(cells[5].c_str(), nullptr);
    if (cells[0] == "-10") REQUIRE(init < 0.0);
    if (cells[0] == "0") REQUIRE(std::abs(init) <= 1e-12);
  }
  REQUIRE(rows == 3);
}

TEST_CASE("sweep marks the non-existence region honestly", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r =
      run_cli("sweep --lambdas 400 --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);

  std::istringstream in(read_file(dir / "sweep_N2_dirichlet_one.csv"));
  std::string header, line;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, line));
  std::vector<std::string> cells;
  std::istringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 6);
  REQUIRE(cells[1] == "nonexistence");
  REQUIRE(cells[2] == "false");
  REQUIRE(cells[3] == "inapplicable");
  REQUIRE(cells[5] == "none");
}

TEST_CASE("an empty sweep writes a bare header", "[cli]") {
  const fs::path dir = fresh_dir();
  const CliResult r =
      run_cli("sweep --lambdas \"\" --out \"" + dir.string() + "\"", dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE(read_file(dir / "sweep_N2_dirichlet_one.csv") ==
          "lambda,classification,picard_converged,monotone_converged,residual,"
          "oracle_init\n");
}

TEST_CASE("sweep output is deterministic across runs and thread counts",
          "[cli]") {
  const fs::path d1 = fresh_dir(), d2 = fresh_dir(), d3 = fresh_dir();
  const std::string args = "sweep --lambdas -2,0.05,0.1,0.2 --out ";
  REQUIRE(run_cli(args + "\"" + d1.string() + "\"", d1,
                  "KHESSIAN_THREADS=1").exit_code == 0);
  REQUIRE(run_cli(args + "\"" + d2.string() + "\"", d2,
                  "KHESSIAN_THREADS=3").exit_code == 0);
  REQUIRE(run_cli(args + "\"" + d3.string() + "\"", d3,
                  "KHESSIAN_THREADS=3").exit_code == 0);
  const std::string a = read_file(d1 / "sweep_N2_dirichlet_one.csv");
  const std::string b = read_file(d2 / "sweep_N2_dirichlet_one.csv");
  const std::string c = read_file(d3 / "sweep_N2_dirichlet_one.csv");
  REQUIRE_FALSE(a.empty());
  REQUIRE(a == b);
  REQUIRE(b == c);
}
