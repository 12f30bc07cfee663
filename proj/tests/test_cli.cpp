#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using sonic::cli::run;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("sonic_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

std::size_t line_count(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("solve writes artifacts and is byte-identical across runs") {
  const auto dir = scratch_dir("solve");
  const auto cfg = write_config(dir, "grid.n = 256\n");
  REQUIRE(run({"-o", (dir / "a").string(), "solve", cfg.string()}) == sonic::cli::kExitOk);
  REQUIRE(run({"solve", cfg.string(), "-o", (dir / "b").string()}) == sonic::cli::kExitOk);
  const auto first = slurp(dir / "a" / "solution.csv");
  CHECK(first.rfind("x,rho,w,E_flux,E_poisson\n", 0) == 0);
  CHECK(line_count(first) == 258);
  CHECK(first == slurp(dir / "b" / "solution.csv"));

  const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report["status"] == "converged");
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest["config_digest"] == report["config_digest"]);
  CHECK(manifest["artifacts"].size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("invalid inputs exit with code 2") {
  const auto dir = scratch_dir("invalid");
  const auto out = (dir / "out").string();
  CHECK(run({"-o", out, "solve", write_config(dir, "b.value = 0.9\n").string()}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "solve", write_config(dir, "speed = 1\n").string()}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "solve", (dir / "missing.cfg").string()}) == sonic::cli::kExitInvalid);
  const auto ok = write_config(dir, "grid.n = 64\n").string();
  CHECK(run({"-o", out, "sweep", ok, "--tau", "1,-1"}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "sweep", ok, "--tau", "1,x"}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "sweep", ok, "--tau", ""}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "convergence", ok, "--levels", "2"}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "analyze", ok, "--nu", "1.5"}) == sonic::cli::kExitInvalid);
  CHECK(run({"-o", out, "analyze", ok, "--endpoint", "middle"}) == sonic::cli::kExitInvalid);
  CHECK(run({"frobnicate"}) == sonic::cli::kExitInvalid);
  CHECK(run({}) == sonic::cli::kExitInvalid);
  fs::remove_all(dir);
}

TEST_CASE("non-convergence exits with code 3 and keeps the history") {
  const auto dir = scratch_dir("noconv");
  const auto cfg = write_config(dir, "grid.n = 128\nmax_iter = 1\n");
  CHECK(run({"-o", dir.string(), "solve", cfg.string()}) == sonic::cli::kExitNoConvergence);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["status"] == "not_converged");
  CHECK(report["residual_history"].size() >= 1);
  CHECK_FALSE(fs::exists(dir / "solution.csv"));
  fs::remove_all(dir);
}

TEST_CASE("analyze gives the same report from a config and from its solution") {
  const auto dir = scratch_dir("analyze");
  const auto cfg = write_config(dir, "grid.n = 512\nalgorithm = newton\n");
  REQUIRE(run({"-o", (dir / "solve").string(), "solve", cfg.string()}) == 0);
  REQUIRE(run({"-o", (dir / "from_cfg").string(), "analyze", cfg.string(), "--no-refinement"}) == 0);
  REQUIRE(run({"-o", (dir / "from_csv").string(), "analyze", (dir / "solve" / "solution.csv").string(),
               "--no-refinement"}) == 0);
  const auto a = nlohmann::json::parse(slurp(dir / "from_cfg" / "regularity_report.json"));
  const auto b = nlohmann::json::parse(slurp(dir / "from_csv" / "regularity_report.json"));
  CHECK(a == b);
  CHECK(a["exponent_right"]["beta"].get<double>() > 0.4);
  CHECK(a["slope_w_right"].get<double>() < 0.0);

  REQUIRE(run({"-o", (dir / "right").string(), "analyze", cfg.string(), "--endpoint", "right", "--nu", "0.6,0.7",
               "--p", "1.2", "--no-refinement"}) == 0);
  const auto r = nlohmann::json::parse(slurp(dir / "right" / "regularity_report.json"));
  CHECK(r["holder_table"].size() == 3);
  CHECK(r["sobolev_table"].size() == 2);
  CHECK_FALSE(r.contains("exponent_left"));
  fs::remove_all(dir);
}

TEST_CASE("sweep writes one row per relaxation time") {
  const auto dir = scratch_dir("sweep");
  const auto cfg = write_config(dir, "grid.n = 256\n");
  REQUIRE(run({"-o", dir.string(), "sweep", cfg.string(), "--tau", "100,10,1"}) == 0);
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(line_count(csv) == 4);
  CHECK(csv.find("\n100,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("convergence writes one row per level and a verdict row") {
  const auto dir = scratch_dir("conv");
  const auto cfg = write_config(dir, "grid.n = 64\nconvergence.n0 = 16\n");
  REQUIRE(run({"-o", dir.string(), "convergence", cfg.string(), "--levels", "3"}) == 0);
  const auto csv = slurp(dir / "convergence.csv");
  CHECK(line_count(csv) == 6);
  CHECK(csv.find("\n128,") != std::string::npos);
  CHECK(csv.find("\nverdict,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("output directory falls back to the environment variable") {
  const auto dir = scratch_dir("env");
  const auto cfg = write_config(dir, "grid.n = 64\n");
  ::setenv(sonic::cli::kOutputDirEnv, (dir / "env_out").string().c_str(), 1);
  const int code = run({"solve", cfg.string()});
  ::unsetenv(sonic::cli::kOutputDirEnv);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "env_out" / "solution.csv"));
  fs::remove_all(dir);
}
