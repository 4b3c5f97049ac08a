#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sbridge/densities.hpp"
#include "sbridge/error.hpp"
#include "sbridge/problem.hpp"

namespace sbridge {

/// Schema violation in a config document; `field` is a JSON-pointer-like
/// path such as "problem.domain.nx" or "rho0[1].cov".
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SolverConfig {
  double tol = 1e-2;
  int maxiter = 200;
  /// "ones" or "file:<path>" naming a snapshot CSV of phi at t1.
  std::string phi_init = "ones";
  bool continuation = false;
  std::vector<double> ramp{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct McConfig {
  int n_particles = 100000;
  std::uint64_t seed = 42;
  int bins = 50;
  double dt_factor = 10.0;
};

struct OutputConfig {
  std::filesystem::path directory = "sbridge_out";
  int snapshots = 5;
};

struct Config {
  ProblemSpec spec;
  GaussianMixture rho0;
  GaussianMixture rho1;
  SolverConfig solver;
  McConfig mc;
  OutputConfig output;
  /// validate(spec) at load time. Loading succeeds even when it has failures.
  ValidationReport validation;
};

/// Parses a config document. Expressions are parsed here, so syntax errors
/// surface before any solve. Throws ConfigError on schema violations; a bad
/// expression becomes a ConfigError naming its field, with the parser's
/// message (including the offset) kept.
Config parse_config(std::string_view json_text);

/// Reads and parses a config file.
Config load_config(const std::filesystem::path& path);

}  // namespace sbridge
