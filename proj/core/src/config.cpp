#include "sbridge/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"

namespace sbridge {

using json = nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& what)
    : InvalidArgument(fmt::format("config field '{}': {}", field, what)), field_(std::move(field)) {}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t k) { return fmt::format("{}[{}]", path, k); }

const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(path, key), "unknown field");
  }
  return j;
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(join(path, key), "required field is missing");
  return *v;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

template <typename T, typename Read>
T optional(const json& obj, const char* key, const std::string& path, T fallback, Read read) {
  const json* v = find(obj, key);
  return v ? read(*v, join(path, key)) : fallback;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], at(path, k)));
  return out;
}

/// Array of equal-length rows. `rows` of 0 accepts any row count.
Eigen::MatrixXd matrix(const json& j, const std::string& path, Eigen::Index rows) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  if (rows > 0 && static_cast<Eigen::Index>(j.size()) != rows)
    throw ConfigError(path, fmt::format("expected {} rows, got {}", rows, j.size()));
  std::vector<std::vector<double>> r;
  for (std::size_t k = 0; k < j.size(); ++k) r.push_back(numbers(j[k], at(path, k)));
  const std::size_t cols = r.front().size();
  if (cols == 0) throw ConfigError(at(path, 0), "empty row");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t a = 0; a < r.size(); ++a) {
    if (r[a].size() != cols) throw ConfigError(at(path, a), "rows differ in length");
    for (std::size_t b = 0; b < cols; ++b) m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r[a][b];
  }
  return m;
}

Expr expression(const json& j, const std::string& path) {
  const std::string text = string(j, path);
  try {
    return Expr::parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

std::array<double, 2> interval(const json& j, const std::string& path) {
  const std::vector<double> v = numbers(j, path);
  if (v.size() != 2) throw ConfigError(path, "expected [min, max]");
  if (!(v[0] < v[1])) throw ConfigError(path, "min must be below max");
  return {v[0], v[1]};
}

GaussianMixture mixture(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of components");
  std::vector<GaussianComponent> comps;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = at(path, k);
    const json& c = object(j[k], p, {"weight", "mean", "cov"});
    GaussianComponent g;
    g.weight = number(require(c, "weight", p), join(p, "weight"));
    const std::vector<double> mean = numbers(require(c, "mean", p), join(p, "mean"));
    if (mean.size() != 2) throw ConfigError(join(p, "mean"), "expected two coordinates");
    g.mean = Eigen::Vector2d(mean[0], mean[1]);
    const Eigen::MatrixXd cov = matrix(require(c, "cov", p), join(p, "cov"), 2);
    if (cov.cols() != 2) throw ConfigError(join(p, "cov"), "expected a 2x2 matrix");
    g.covariance = cov;
    comps.push_back(g);
  }
  try {
    return GaussianMixture(std::move(comps));
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

ProblemSpec problem(const json& root) {
  const std::string path = "problem";
  const json& p = object(require(root, "problem", ""), path,
                         {"drift", "g", "sigma", "state_cost", "R", "lambda", "t0", "t1", "dt", "domain"});
  ProblemSpec spec;

  const json& drift = require(p, "drift", path);
  if (!drift.is_array() || drift.size() != 2) throw ConfigError("problem.drift", "expected two expressions");
  spec.f1 = expression(drift[0], "problem.drift[0]");
  spec.f2 = expression(drift[1], "problem.drift[1]");
  spec.g = matrix(require(p, "g", path), "problem.g", 2);
  spec.sigma = matrix(require(p, "sigma", path), "problem.sigma", 2);
  spec.q = optional(p, "state_cost", path, Expr::constant(0.0), expression);
  const json* r = find(p, "R");
  spec.R = r ? matrix(*r, "problem.R", spec.g.cols())
             : Eigen::MatrixXd::Identity(spec.g.cols(), spec.g.cols());
  spec.lambda = optional(p, "lambda", path, 1.0, number);
  spec.t0 = optional(p, "t0", path, 0.0, number);
  spec.t1 = optional(p, "t1", path, 1.0, number);
  spec.dt = number(require(p, "dt", path), "problem.dt");

  const std::string dp = "problem.domain";
  const json& d = object(require(p, "domain", path), dp, {"x1", "x2", "nx", "ny"});
  const auto x1 = interval(require(d, "x1", dp), dp + ".x1");
  const auto x2 = interval(require(d, "x2", dp), dp + ".x2");
  const long long nx = integer(require(d, "nx", dp), dp + ".nx");
  const long long ny = integer(require(d, "ny", dp), dp + ".ny");
  if (nx < 3) throw ConfigError(dp + ".nx", "need at least 3 points");
  if (ny < 3) throw ConfigError(dp + ".ny", "need at least 3 points");
  spec.grid = Grid2D(x1[0], x1[1], x2[0], x2[1], static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));

  // Solver-block fields that live on the ProblemSpec.
  if (const json* s = find(root, "solver")) {
    if (const json* v = find(*s, "buffer_stride")) {
      const long long stride = integer(*v, "solver.buffer_stride");
      if (stride < 1) throw ConfigError("solver.buffer_stride", "must be a positive integer");
      spec.buffer_stride = static_cast<int>(stride);
    }
    if (const json* v = find(*s, "relative_floor")) spec.relative_floor = number(*v, "solver.relative_floor");
  }
  return spec;
}

SolverConfig solver_block(const json& root) {
  SolverConfig out;
  const json* s = find(root, "solver");
  if (!s) return out;
  const std::string path = "solver";
  object(*s, path, {"tol", "maxiter", "phi_init", "buffer_stride", "relative_floor", "continuation", "ramp"});
  out.tol = optional(*s, "tol", path, out.tol, number);
  if (!(out.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  const long long maxiter = optional(*s, "maxiter", path, static_cast<long long>(out.maxiter), integer);
  if (maxiter < 1) throw ConfigError("solver.maxiter", "must be at least 1");
  out.maxiter = static_cast<int>(maxiter);
  out.phi_init = optional(*s, "phi_init", path, out.phi_init, string);
  if (out.phi_init != "ones" && out.phi_init.rfind("file:", 0) != 0)
    throw ConfigError("solver.phi_init", "expected \"ones\" or \"file:<path>\"");
  out.continuation = optional(*s, "continuation", path, out.continuation, boolean);
  if (const json* ramp = find(*s, "ramp")) {
    out.ramp = numbers(*ramp, "solver.ramp");
    if (out.ramp.empty() || out.ramp.back() != 1.0)
      throw ConfigError("solver.ramp", "must be non-empty and end at 1 (the full mismatch)");
  }
  return out;
}

McConfig mc_block(const json& root) {
  McConfig out;
  const json* m = find(root, "mc");
  if (!m) return out;
  const std::string path = "mc";
  object(*m, path, {"n_particles", "seed", "bins", "dt_factor"});
  const long long n = optional(*m, "n_particles", path, static_cast<long long>(out.n_particles), integer);
  if (n < 1) throw ConfigError("mc.n_particles", "must be at least 1");
  out.n_particles = static_cast<int>(n);
  if (const json* seed = find(*m, "seed")) {
    if (!seed->is_number_unsigned()) throw ConfigError("mc.seed", "expected a non-negative integer");
    out.seed = seed->get<std::uint64_t>();
  }
  const long long bins = optional(*m, "bins", path, static_cast<long long>(out.bins), integer);
  if (bins < 2) throw ConfigError("mc.bins", "must be at least 2");
  out.bins = static_cast<int>(bins);
  out.dt_factor = optional(*m, "dt_factor", path, out.dt_factor, number);
  if (!(out.dt_factor > 0.0)) throw ConfigError("mc.dt_factor", "must be positive");
  return out;
}

OutputConfig output_block(const json& root) {
  OutputConfig out;
  const json* o = find(root, "output");
  if (!o) return out;
  const std::string path = "output";
  object(*o, path, {"directory", "snapshots"});
  out.directory = optional(*o, "directory", path, out.directory.string(), string);
  const long long n = optional(*o, "snapshots", path, static_cast<long long>(out.snapshots), integer);
  if (n < 1) throw ConfigError("output.snapshots", "must be at least 1");
  out.snapshots = static_cast<int>(n);
  return out;
}

}  // namespace

Config parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", fmt::format("malformed JSON at byte {}", e.byte));
  }
  object(root, "", {"problem", "rho0", "rho1", "solver", "mc", "output"});
  SolverConfig solver = solver_block(root);
  ProblemSpec spec = problem(root);
  GaussianMixture rho0 = mixture(require(root, "rho0", ""), "rho0");
  GaussianMixture rho1 = mixture(require(root, "rho1", ""), "rho1");
  ValidationReport report = validate(spec);
  return Config{std::move(spec), std::move(rho0), std::move(rho1), std::move(solver),
                mc_block(root),  output_block(root), std::move(report)};
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace sbridge
