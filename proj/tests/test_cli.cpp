#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "app.hpp"

namespace fs = std::filesystem;
using batchps::cli::run;

namespace {

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "batchps");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "batchps_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& f) {
  std::ifstream in(f);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<std::string> line(const fs::path& f, int n) {
  std::ifstream in(f);
  std::string l;
  for (int i = 0; i <= n; ++i) std::getline(in, l);
  std::vector<std::string> cells;
  std::stringstream ss(l);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

}  // namespace

TEST_CASE("pmf output") {
  const auto dir = scratch("pmf");
  REQUIRE(call({"pmf", "--rho", "0.21", "--q", "0.3", "--out", dir.string()}) == 0);
  for (const char* f : {"m.csv", "mtilde_tail_sum.csv", "mtilde_composition.csv", "j.csv", "j_given_b2_m10.csv"}) {
    CHECK(first_line(dir / f) == "index,value,asymptote,ratio");
  }
  // P(M = 1) = (1-q)/(1+rho).
  const auto row = line(dir / "m.csv", 1);
  REQUIRE(row.size() == 4);
  CHECK(row[0] == "1");
  CHECK(std::stod(row[1]) == doctest::Approx(0.7 / 1.21).epsilon(1e-11));
  CHECK(row[1].find('e') != std::string::npos);

  // Rerun is byte-identical.
  const auto again = scratch("pmf2");
  REQUIRE(call({"pmf", "--rho", "0.21", "--q", "0.3", "--out", again.string()}) == 0);
  CHECK(slurp(dir / "j.csv") == slurp(again / "j.csv"));
  CHECK(slurp(dir / "m.csv") == slurp(again / "m.csv"));
}

TEST_CASE("load parametrisations give the same constants") {
  const auto a = scratch("rho");
  const auto b = scratch("rhostar");
  REQUIRE(call({"constants", "--rho", "0.49", "--q", "0.3", "--out", a.string()}) == 0);
  REQUIRE(call({"constants", "--rho-star", "0.7", "--q", "0.3", "--out", b.string()}) == 0);
  CHECK(slurp(a / "constants.csv") == slurp(b / "constants.csv"));
}

TEST_CASE("configuration errors") {
  CHECK(call({"constants", "--rho", "0.8", "--q", "0.3"}) == 2);
  CHECK(call({"constants", "--rho", "0.2", "--rho-star", "0.3", "--q", "0.3"}) == 2);
  CHECK(call({"constants", "--q", "0.3"}) == 2);
  CHECK(call({"constants", "--rho", "0.2", "--q", "1.3"}) == 2);
  CHECK(call({"constants", "--rho", "0.2", "--q", "0.3", "--config", "/nonexistent/x.json"}) == 2);
  CHECK(call({"validate", "--rho", "0.2", "--q", "0.3", "--tolerance", "no_such_check=1"}) == 2);
  CHECK(call({"validate", "--rho", "0.2", "--q", "0.3", "--tolerance", "garbage"}) == 2);
  CHECK(call({"nope"}) == 2);
}

TEST_CASE("truncation and simulation guard exits") {
  CHECK(call({"pmf", "--rho-star", "0.7", "--q", "0.7", "--m-max", "5", "--out", scratch("trunc").string()}) == 3);
  CHECK(call({"simulate", "--rho-star", "0.3", "--q", "0.3", "--replications", "2000", "--event-cap", "5", "--out",
              scratch("guard").string()}) == 4);
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("config");
  const auto file = dir / "cfg.json";
  std::ofstream(file) << R"({"rho_star": 0.3, "q": 0.3, "seed": 7, "replications": 5000, "mode": "stream"})";
  const auto a = dir / "a";
  const auto b = dir / "b";
  REQUIRE(call({"simulate", "--config", file.string(), "--out", a.string()}) == 0);
  REQUIRE(call({"simulate", "--config", file.string(), "--seed", "8", "--out", b.string()}) == 0);
  const auto sa = nlohmann::json::parse(slurp(a / "summary.json"));
  const auto sb = nlohmann::json::parse(slurp(b / "summary.json"));
  CHECK(sa.at("seed") == 7);
  CHECK(sb.at("seed") == 8);
  CHECK(sa.at("mode") == "stream");
  CHECK(sa.at("replications") == 5000);
  CHECK(first_line(a / "records_head.csv").starts_with("replication,"));
  CHECK(slurp(a / "records_head.csv") != slurp(b / "records_head.csv"));
}

TEST_CASE("simulate is reproducible") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  for (const auto& d : {a, b}) {
    REQUIRE(call({"simulate", "--rho-star", "0.7", "--q", "0.7", "--replications", "20000", "--seed", "5", "--out",
                  d.string()}) == 0);
  }
  for (const char* f : {"records_head.csv", "sim_pmf_j.csv", "sim_ccdf_omega.csv", "summary.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(first_line(a / "sim_pmf_n0.csv") == "index,value,std_error,count");
  CHECK(first_line(a / "sim_ccdf_omega_hat.csv") == "x,ccdf,std_error");
}

TEST_CASE("validate report") {
  const auto ok = scratch("val_ok");
  CHECK(call({"validate", "--rho-star", "0.3", "--q", "0.3", "--replications", "20000", "--out", ok.string()}) == 0);
  const auto report = nlohmann::json::parse(slurp(ok / "validation.json"));
  CHECK(report.at("overall") == "pass");
  CHECK(report.at("checks").size() > 10);

  const auto bad = scratch("val_bad");
  CHECK(call({"validate", "--rho-star", "0.3", "--q", "0.3", "--replications", "20000", "--inject-fault", "--out",
              bad.string()}) == 1);
  const auto failed = nlohmann::json::parse(slurp(bad / "validation.json"));
  CHECK(failed.at("overall") == "fail");
  CHECK(failed.at("failures").size() == 1);
}

TEST_CASE("figures headers") {
  const auto dir = scratch("fig");
  REQUIRE(call({"figures", "--replications", "20000", "--out", dir.string()}) == 0);
  CHECK(first_line(dir / "fig3.csv") == "j,sim_j,sim_i_b,analytic_j,approx_j");
  CHECK(first_line(dir / "fig4.csv") == "j,sim_j,sim_i_b,analytic_j,approx_j");
  CHECK(first_line(dir / "fig5.csv") == "x,ccdf_omega,ccdf_omega_hat,approx_omega");
  CHECK(first_line(dir / "fig6.csv") == "x,ccdf_omega,ccdf_omega_hat,approx_omega");
}
