#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "oracles.hpp"
#include "sbridge/commands.hpp"
#include "sbridge/config.hpp"
#include "sbridge/snapshot_io.hpp"

using namespace sbridge;
using namespace sbridge::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Matched heat-flow problem: converges in a handful of iterations.
json heat_config(const fs::path& out) {
  json j = json::parse(R"({
    "problem": {
      "drift": ["0", "0"],
      "g": [[1, 0], [0, 1]],
      "sigma": [[1, 0], [0, 1]],
      "state_cost": "0",
      "R": [[1, 0], [0, 1]],
      "lambda": 1,
      "t0": 0,
      "t1": 0.1,
      "dt": 0.001,
      "domain": {"x1": [-2, 2], "x2": [-2, 2], "nx": 41, "ny": 41}
    },
    "rho0": [{"weight": 1, "mean": [0, 0], "cov": [[0.05, 0], [0, 0.05]]}],
    "rho1": [{"weight": 1, "mean": [0, 0], "cov": [[0.15, 0], [0, 0.15]]}],
    "solver": {"tol": 0.01, "maxiter": 50},
    "mc": {"n_particles": 2000, "seed": 7, "bins": 20},
    "output": {"snapshots": 4}
  })");
  j["output"]["directory"] = out.string();
  return j;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  write_file(p, j.dump(2));
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SBRIDGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Commands, SolveDiagnoseVerifyOnMatchedProblem) {
  const fs::path dir = scratch_dir("cmd");
  const fs::path out = dir / "out";
  const fs::path cfg_path = write_config(dir, heat_config(out));
  std::ostringstream so, se;

  ASSERT_EQ(cli::solve(cfg_path, {}, so, se), cli::kOk) << se.str();
  EXPECT_NE(so.str().find("converged"), std::string::npos);
  EXPECT_EQ(read_file(out / "convergence.csv").rfind("iter,err_hilbert\n", 0), 0u);
  EXPECT_FALSE(fs::exists(out / ".sbridge.lock"));

  const Manifest m = read_manifest(out);
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.tol, 1e-2);
  // Buffer at stride 10 over 100 steps: 11 recovery times.
  ASSERT_EQ(m.times.size(), 11u);
  for (std::size_t k = 0; k < m.times.size(); ++k) EXPECT_NEAR(m.times[k], 0.01 * k, 1e-14);
  std::size_t rho_files = 0, u_files = 0;
  for (const ManifestEntry& e : m.files) {
    ASSERT_TRUE(fs::exists(out / e.file)) << e.file;
    const SnapshotFile f = read_snapshot(out / e.file);
    EXPECT_EQ(f.quantity, e.quantity);
    EXPECT_EQ(f.t, e.t);
    rho_files += e.quantity == "rho";
    u_files += e.quantity == "u1" || e.quantity == "u2";
  }
  EXPECT_EQ(rho_files, 4u);
  EXPECT_EQ(u_files, 8u);

  so.str("");
  ASSERT_EQ(cli::diagnose(cfg_path, out, {}, so, se), cli::kOk) << se.str();
  const Manifest dm = read_manifest(out / "diagnostics");
  ASSERT_EQ(dm.files.size(), 4u);
  for (const ManifestEntry& e : dm.files) {
    const SnapshotFile f = read_snapshot(out / "diagnostics" / e.file);
    EXPECT_EQ(f.quantity, "reaction");
    for (double v : f.field.values()) EXPECT_EQ(v, 0.0);
  }
  const json v = json::parse(read_file(out / "diagnostics" / "validation.json"));
  EXPECT_TRUE(v["ok"].get<bool>());
  EXPECT_TRUE(v["mismatch"]["matched_channel"].get<bool>());

  ASSERT_EQ(cli::verify(cfg_path, out, {}, so, se), cli::kOk) << se.str();
  ASSERT_EQ(cli::verify(cfg_path, out, {}, so, se), cli::kOk) << se.str();
  std::istringstream lines(read_file(out / "verification.jsonl"));
  std::string a, b, extra;
  ASSERT_TRUE(std::getline(lines, a));
  ASSERT_TRUE(std::getline(lines, b));
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(a, b);
  const json rec = json::parse(a);
  EXPECT_EQ(rec["n_particles"].get<int>(), 2000);
  EXPECT_EQ(rec["seed"].get<int>(), 7);
  EXPECT_LE(rec["tv_to_target"].get<double>(), 0.15);
  fs::remove_all(dir);
}

TEST(Commands, StrideAndOutputOverrides) {
  const fs::path dir = scratch_dir("cmd_opt");
  const fs::path cfg_path = write_config(dir, heat_config(dir / "ignored"));
  cli::Options opt;
  opt.output = dir / "elsewhere";
  opt.stride = 25;
  std::ostringstream so, se;
  ASSERT_EQ(cli::solve(cfg_path, opt, so, se), cli::kOk) << se.str();
  EXPECT_FALSE(fs::exists(dir / "ignored"));
  const Manifest m = read_manifest(dir / "elsewhere");
  EXPECT_EQ(m.times.size(), 5u);  // steps 0, 25, 50, 75, 100
  fs::remove_all(dir);
}

TEST(Commands, LockedDirectoryIsARuntimeError) {
  const fs::path dir = scratch_dir("cmd_lock");
  const fs::path cfg_path = write_config(dir, heat_config(dir / "out"));
  fs::create_directories(dir / "out");
  OutputLock held(dir / "out");
  std::ostringstream so, se;
  EXPECT_EQ(cli::solve(cfg_path, {}, so, se), cli::kRuntimeError);
  EXPECT_NE(se.str().find("in use"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Commands, ValidationFailureIsRefused) {
  std::ostringstream so, se;
  const fs::path dir = scratch_dir("cmd_cfl");
  cli::Options opt;
  opt.output = dir;
  EXPECT_EQ(cli::solve(fs::path(SBRIDGE_CONFIG_DIR) / "cfl_violation.json", opt, so, se), cli::kRefused);
  EXPECT_NE(se.str().find("CFL"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "convergence.csv"));
  fs::remove_all(dir);
}

TEST(CliBinary, CflViolationExitsWithTwo) {
  const fs::path dir = scratch_dir("bin_cfl");
  EXPECT_EQ(run_cli("--output " + (dir / "o").string() + " solve " + SBRIDGE_CONFIG_DIR "/cfl_violation.json"), 2);
  fs::remove_all(dir);
}

TEST(CliBinary, RuntimeErrorExitsWithOne) {
  const fs::path dir = scratch_dir("bin_err");
  json j = heat_config(dir / "out");
  j["solver"]["phi_init"] = "file:" + (dir / "missing.csv").string();
  const fs::path cfg_path = write_config(dir, j);
  EXPECT_EQ(run_cli("solve " + cfg_path.string()), 1);
  EXPECT_EQ(run_cli("solve " + (dir / "no_such_config.json").string()), 1);
  fs::remove_all(dir);
}

TEST(CliBinary, SolveSucceedsWithZero) {
  const fs::path dir = scratch_dir("bin_ok");
  const fs::path cfg_path = write_config(dir, heat_config(dir / "out"));
  EXPECT_EQ(run_cli("solve " + cfg_path.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  fs::remove_all(dir);
}
