#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "../tools/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ouspec_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ou::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string problem(const char* name) { return (fs::path(OUSPEC_SOURCE_DIR) / "problems" / name).string(); }

}  // namespace

TEST_CASE("basis-check") {
  TempDir tmp;
  SUBCASE("defaults pass") {
    const Result r = run({"basis-check", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const json s = read_json(tmp.path / "summary.json");
    CHECK(s["pass"] == true);
    CHECK(s["modes"] == 25);
    CHECK(s["max_orthonormality"].get<double>() <= 1e-10);
    CHECK(read_csv(tmp.path / "orthonormality.csv").front() == std::vector<std::string>{"alpha", "beta", "residual"});
    CHECK(fs::exists(tmp.path / "eigenrelation.csv"));
    CHECK(read_json(tmp.path / "config.json")["command"] == "basis-check");
  }
  SUBCASE("d=2 N=16 reports 153 modes") {
    const Result r = run({"basis-check", "-d", "2", "-N", "16", "-M", "20", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    CHECK(read_json(tmp.path / "summary.json")["modes"] == 153);
  }
  SUBCASE("M = N is a config error") {
    CHECK(run({"basis-check", "-N", "24", "-M", "24", "--out", tmp.path.string()}).code == 4);
  }
  SUBCASE("impossible tolerance is an invariant breach naming the pair") {
    const Result r = run({"basis-check", "--tol", "1e-30", "--out", tmp.path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("(") != std::string::npos);
    CHECK(read_json(tmp.path / "summary.json")["pass"] == false);
  }
}

TEST_CASE("dispersive-scan") {
  TempDir tmp;
  SUBCASE("shape and bound") {
    const Result r = run({"dispersive-scan", "--count", "4", "--t-count", "6", "--no-refine", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const auto rows = read_csv(tmp.path / "dispersive.csv");
    CHECK(rows.size() == 1 + 4 * 6);
    CHECK(rows.front() == std::vector<std::string>{"sample_id", "t_or_pair", "quotient"});
    const json s = read_json(tmp.path / "summary.json");
    CHECK(s["max"].get<double>() <= 1.0 + 1e-6);
    CHECK(s["refinement_delta"].is_null());
  }
  SUBCASE("hermite k=0 peaks at pi/2") {
    const Result r = run({"dispersive-scan", "--profile", "hermite-mode", "--k", "0", "--count", "1", "--out",
                          tmp.path.string()});
    CHECK(r.code == 0);
    const json s = read_json(tmp.path / "summary.json");
    CHECK(std::abs(s["max"].get<double>() - 1.0) < 1e-6);
    CHECK(std::stod(s["argmax"]["t"].get<std::string>()) == doctest::Approx(M_PI / 2));
    CHECK(s["refinement_delta"].get<double>() < 1e-6);
  }
  SUBCASE("below the singularity guard") {
    const Result r = run({"dispersive-scan", "--t-min", "0.01", "--out", tmp.path.string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("guard") != std::string::npos);
  }
}

TEST_CASE("strichartz-scan") {
  TempDir tmp;
  SUBCASE("energy pair and endpoint with refinement") {
    const Result r = run({"strichartz-scan", "--count", "2", "--pairs", "inf:2,4:inf", "--time-nodes", "41", "--refine",
                          "--no-dual", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const auto rows = read_csv(tmp.path / "strichartz.csv");
    CHECK(rows.front() == std::vector<std::string>{"sample_id", "t_or_pair", "quotient", "delta"});
    CHECK(rows.size() == 1 + 2 * 2);
    const json s = read_json(tmp.path / "summary.json");
    REQUIRE(s["pairs"].size() == 2);
    CHECK(std::abs(s["pairs"][0]["max"].get<double>() - 1.0) < 1e-12);
    CHECK(std::isfinite(s["pairs"][1]["max"].get<double>()));
    CHECK(s["refinement_delta"].get<double>() < 0.01);
  }
  SUBCASE("dual rows") {
    const Result r = run({"strichartz-scan", "--count", "1", "--pair-count", "3", "--time-nodes", "21", "--out",
                          tmp.path.string()});
    CHECK(r.code == 0);
    const auto rows = read_csv(tmp.path / "strichartz.csv");
    int dual = 0;
    for (const auto& row : rows) dual += row[1].rfind("dual:", 0) == 0;
    CHECK(dual > 0);
    CHECK(read_json(tmp.path / "summary.json").contains("dual_max"));
  }
  SUBCASE("non-admissible pair") {
    CHECK(run({"strichartz-scan", "--pairs", "8:3", "--out", tmp.path.string()}).code == 4);
  }
}

TEST_CASE("nls-solve") {
  TempDir tmp;
  SUBCASE("subcritical example") {
    const Result r = run({"nls-solve", "--problem", problem("subcritical_d1_p3.json"), "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const json rep = read_json(tmp.path / "report.json");
    CHECK(rep["converged"] == true);
    CHECK(rep["residuals"].back().get<double>() <= 1e-8);
    CHECK(fs::exists(tmp.path / "solution.ousf"));
    const auto mass = read_csv(tmp.path / "mass.csv");
    CHECK(mass.size() == 62);
  }
  SUBCASE("critical example with automatic interval") {
    const Result r = run({"nls-solve", "--problem", problem("critical_d1_p5.json"), "--format", "json", "--out",
                          tmp.path.string()});
    CHECK(r.code == 0);
    const json rep = read_json(tmp.path / "report.json");
    CHECK(rep["regime"] == "critical");
    CHECK(rep["iterations"].get<int>() <= 15);
    CHECK(rep["smallness"]["satisfied"] == true);
    CHECK(fs::exists(tmp.path / "solution.json"));
  }
  SUBCASE("supercritical power") {
    CHECK(run({"nls-solve", "--problem", problem("subcritical_d1_p3.json"), "--p", "7", "--out", tmp.path.string()})
              .code == 3);
  }
  SUBCASE("non-convergence") {
    const Result r = run({"nls-solve", "--problem", problem("subcritical_d1_p3.json"), "--max-iter", "2", "--out",
                          tmp.path.string()});
    CHECK(r.code == 2);
    CHECK(read_json(tmp.path / "report.json")["converged"] == false);
  }
  SUBCASE("missing problem file") {
    CHECK(run({"nls-solve", "--problem", (tmp.path / "nope.json").string(), "--out", tmp.path.string()}).code == 4);
  }
}

TEST_CASE("critical-interval") {
  TempDir tmp;
  SUBCASE("zero center gives the full interval") {
    const Result r = run({"critical-interval", "--zero", "--p", "5", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const json j = read_json(tmp.path / "interval.json");
    CHECK(j["n"] == 0);
    CHECK(j["T"].get<double>() == doctest::Approx(M_PI / 2));
    CHECK(j.contains("norm"));
  }
  SUBCASE("halving eta never lengthens the interval") {
    const fs::path a = tmp.path / "a", b = tmp.path / "b";
    CHECK(run({"critical-interval", "--problem", problem("critical_d1_p5.json"), "--eta", "0.004", "--out",
               a.string()}).code == 0);
    CHECK(run({"critical-interval", "--problem", problem("critical_d1_p5.json"), "--eta", "0.002", "--out",
               b.string()}).code == 0);
    CHECK(read_json(b / "interval.json")["T"].get<double>() <= read_json(a / "interval.json")["T"].get<double>());
    CHECK(read_csv(a / "tested.csv").front() == std::vector<std::string>{"n", "T", "norm"});
  }
  SUBCASE("bound not met within n_max") {
    CHECK(run({"critical-interval", "--problem", problem("critical_d1_p5.json"), "--eta", "1e-9", "--n-max", "8",
               "--out", tmp.path.string()}).code == 2);
  }
}

TEST_CASE("configs, precedence and echo") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  std::ofstream(cfg) << R"({"max_degree": 10, "nodes": 14, "tol": 1e-9})";
  const Result r = run({"basis-check", "--config", cfg.string(), "-N", "12", "--out", tmp.path.string()});
  CHECK(r.code == 0);
  const json eff = read_json(tmp.path / "config.json");
  CHECK(eff["max_degree"] == 12);
  CHECK(eff["nodes"] == 14);
  CHECK(eff["tol"] == 1e-9);
  CHECK(read_json(tmp.path / "summary.json")["modes"] == 13);

  std::ofstream(cfg) << R"({"max_degre": 10})";
  CHECK(run({"basis-check", "--config", cfg.string(), "--out", tmp.path.string()}).code == 4);
  std::ofstream(cfg) << R"({"max_degree": "ten"})";
  CHECK(run({"basis-check", "--config", cfg.string(), "--out", tmp.path.string()}).code == 4);
  CHECK(run({"basis-check", "--config", (tmp.path / "none.json").string(), "--out", tmp.path.string()}).code == 4);
  CHECK(run({"basis-check", "--bogus"}).code == 4);
  CHECK(run({}).code == 4);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("output directory from the environment") {
  TempDir tmp;
  const fs::path dir = tmp.path / "from_env";
  ::setenv(ou::cli::kOutDirEnv, dir.c_str(), 1);
  const Result r = run({"basis-check", "-N", "4", "-M", "6"});
  ::unsetenv(ou::cli::kOutDirEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("identical configs give byte-identical outputs") {
  TempDir tmp;
  const fs::path a = tmp.path / "a", b = tmp.path / "b";
  for (const fs::path& d : {a, b}) {
    REQUIRE(run({"dispersive-scan", "--count", "3", "--t-count", "4", "--seed", "7", "--out", d.string()}).code == 0);
    REQUIRE(run({"strichartz-scan", "--count", "2", "--pair-count", "3", "--time-nodes", "21", "--seed", "7", "--out",
                 (d / "s").string()}).code == 0);
    REQUIRE(run({"nls-solve", "--problem", problem("subcritical_d1_p3.json"), "--out", (d / "n").string()}).code == 0);
  }
  for (const char* f : {"dispersive.csv", "summary.json", "config.json", "s/strichartz.csv", "s/summary.json",
                        "n/solution.ousf", "n/report.json", "n/mass.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}
