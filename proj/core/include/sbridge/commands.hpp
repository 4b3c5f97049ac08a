#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sbridge/config.hpp"
#include "sbridge/mc_verify.hpp"
#include "sbridge/sinkhorn.hpp"

namespace sbridge {

struct SolveOutput {
  Solution solution;
  ScalarField rho0;
  ScalarField rho1;
  std::vector<ContinuationStage> stages;  // empty unless continuation ran
};

/// Discretises the endpoints, builds phi_init and runs the driver (or the
/// mismatch continuation). Progress lines go to `log` when given. Expects a
/// validated config.
SolveOutput solve_config(const Config& cfg, std::ostream* log = nullptr);

/// Writes convergence.csv, the snapshot CSVs and manifest.json into `dir`.
void write_solution(const std::filesystem::path& dir, const Config& cfg, const SolveOutput& out);

/// Rebuilds the feedback policy from a solve directory: reads phi at t1 and
/// repeats the final backward pass, so u is available at every buffer time.
Solution load_policy(const Config& cfg, const std::filesystem::path& dir);

/// One JSON line describing an ensemble; identical inputs give identical bytes.
std::string verification_record(const Config& cfg, const EnsembleResult& r);

namespace cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kRefused = 2;

struct Options {
  std::optional<std::filesystem::path> output;
  std::optional<int> stride;
  bool continuation = false;
};

/// Each command reports progress and errors on `err` and returns an exit code.
int solve(const std::filesystem::path& config, const Options& opt, std::ostream& out, std::ostream& err);
int verify(const std::filesystem::path& config, const std::filesystem::path& dir, const Options& opt,
           std::ostream& out, std::ostream& err);
int diagnose(const std::filesystem::path& config, const std::filesystem::path& dir, const Options& opt,
             std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace sbridge
