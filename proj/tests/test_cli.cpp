#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "meshopt/network.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli = MESHOPT_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("meshopt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("generate writes the requested scenario and is byte-deterministic") {
  TempDir tmp;
  const fs::path a = tmp.path / "a.json";
  const fs::path b = tmp.path / "b.json";
  REQUIRE(run("generate --n 15 --f 3 --seed 7 --out " + a.string()) == 0);
  REQUIRE(run("generate --n 15 --f 3 --seed 7 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));

  const meshopt::Scenario sc = meshopt::load_scenario(a.string());
  CHECK(sc.node_count() == 15);
  CHECK(sc.session_count() == 3);

  const fs::path c = tmp.path / "c.json";
  REQUIRE(run("generate --n 15 --f 3 --seed 8 --out " + c.string()) == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("generate rejects n < 2 with a nonzero exit") {
  TempDir tmp;
  CHECK(run("generate --n 1 --out " + (tmp.path / "x.json").string()) == 1);
}

TEST_CASE("solve on the micro scenario reports the analytic objective") {
  TempDir tmp;
  const fs::path scen = tmp.path / "micro.json";
  meshopt::save_scenario(testsup::micro_scenario(10.0), scen.string());

  const fs::path out = tmp.path / "run";
  REQUIRE(run("solve --scenario " + scen.string() + " --method cutting-plane --scheme dpc" +
              " --tol 1e-6 --out " + out.string()) == 0);

  const auto sol = nlohmann::json::parse(slurp(out / "solution.json"));
  const double expect = std::log(std::log2(11.0));
  CHECK(std::abs(sol.at("objective").get<double>() - expect) <= 1e-3);
  CHECK(fs::exists(out / "trace.csv"));

  // Identical run config reproduces identical bytes.
  const fs::path out2 = tmp.path / "run2";
  REQUIRE(run("solve --scenario " + scen.string() + " --method cutting-plane --scheme dpc" +
              " --tol 1e-6 --out " + out2.string()) == 0);
  CHECK(slurp(out / "solution.json") == slurp(out2 / "solution.json"));
}

TEST_CASE("solve scheme=both writes compare.json with a nonnegative gain") {
  TempDir tmp;
  const fs::path out = tmp.path / "both";
  REQUIRE(run("solve --n 6 --f 2 --seed 11 --dmax 0.8 --scheme both --out " + out.string()) ==
          0);
  const auto cmp = nlohmann::json::parse(slurp(out / "compare.json"));
  CHECK(cmp.at("dominance_ok").get<bool>());
  CHECK(cmp.at("objective_dpc").get<double>() >=
        cmp.at("objective_tdm").get<double>() - 1e-6);
  CHECK(fs::exists(out / "solution_dpc.json"));
  CHECK(fs::exists(out / "solution_tdm.json"));
  CHECK(fs::exists(out / "trace_dpc.csv"));
}

TEST_CASE("solve with the subgradient method emits harmonic-step traces") {
  TempDir tmp;
  const fs::path scen = tmp.path / "micro.json";
  meshopt::save_scenario(testsup::micro_scenario(10.0), scen.string());
  const fs::path out = tmp.path / "sg";
  REQUIRE(run("solve --scenario " + scen.string() +
              " --method subgradient --beta 0.1 --max-iters 1500 --out " + out.string()) ==
          0);
  const std::string csv = slurp(out / "trace.csv");
  CHECK(csv.rfind("k,dual_bound", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1501);
}

TEST_CASE("unreadable scenario exits with code 1") {
  CHECK(run("solve --scenario /nonexistent/path.json") == 1);
}
