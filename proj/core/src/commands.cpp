#include "sbridge/commands.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "sbridge/error.hpp"
#include "sbridge/snapshot_io.hpp"

namespace sbridge {

namespace fs = std::filesystem;

namespace {

ScalarField initial_guess(const Config& cfg) {
  const std::string& mode = cfg.solver.phi_init;
  if (mode == "ones") return ScalarField(cfg.spec.grid, 1.0);
  const fs::path path = mode.substr(5);
  SnapshotFile f = read_snapshot(path);
  if (!(f.field.grid() == cfg.spec.grid))
    throw InvalidArgument(fmt::format("phi_init file '{}' is not on the problem grid", path.string()));
  return std::move(f.field);
}

std::string quantity_file(const std::string& quantity, std::size_t k) { return fmt::format("{}_{:03d}.csv", quantity, k); }

const ManifestEntry& final_phi(const Manifest& m, const fs::path& dir) {
  const ManifestEntry* best = nullptr;
  for (const ManifestEntry& e : m.files)
    if (e.quantity == "phi" && (!best || e.t > best->t)) best = &e;
  if (!best) throw Error(fmt::format("{}: manifest lists no phi snapshot", dir.string()));
  return *best;
}

}  // namespace

SolveOutput solve_config(const Config& cfg, std::ostream* log) {
  SolveOutput out{Solution{}, discretize_normalized(cfg.rho0, cfg.spec.grid),
                  discretize_normalized(cfg.rho1, cfg.spec.grid), {}};
  SinkhornOptions opt;
  opt.tol = cfg.solver.tol;
  opt.maxiter = cfg.solver.maxiter;
  if (log) {
    opt.on_iteration = [log](int it, std::optional<double> err) {
      if (err)
        fmt::print(*log, "iteration {:4d}  err {:.6e}\n", it, *err);
      else
        fmt::print(*log, "iteration {:4d}\n", it);
      log->flush();
    };
  }
  const ScalarField guess = initial_guess(cfg);
  if (cfg.solver.continuation) {
    out.solution = run_continuation(cfg.spec, out.rho0, out.rho1, guess, opt, &out.stages, cfg.solver.ramp);
    if (log)
      for (const ContinuationStage& s : out.stages)
        fmt::print(*log, "stage scale {:.4g}: {} after {} iterations\n", s.scale,
                   s.converged ? "converged" : "not converged", s.iterations);
  } else {
    out.solution = run(cfg.spec, out.rho0, out.rho1, guess, opt);
  }
  return out;
}

void write_solution(const fs::path& dir, const Config& cfg, const SolveOutput& out) {
  const Solution& sol = out.solution;
  write_convergence(dir / "convergence.csv", sol.trace);

  Manifest m;
  m.converged = sol.converged;
  m.iterations = sol.iterations;
  m.tol = cfg.solver.tol;
  m.times = sol.times;
  const auto emit = [&](const std::string& quantity, std::size_t k, std::size_t snap, const ScalarField& f) {
    const std::string file = quantity_file(quantity, k);
    write_snapshot(dir / file, f, sol.times[snap], quantity);
    m.files.push_back({file, quantity, sol.times[snap], sol.steps[snap]});
  };
  const std::vector<std::size_t> picks =
      evenly_spaced(sol.times.size(), static_cast<std::size_t>(cfg.output.snapshots));
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const std::size_t s = picks[k];
    emit("rho", k, s, sol.rho[s]);
    for (std::size_t c = 0; c < sol.control[s].size(); ++c) emit(fmt::format("u{}", c + 1), k, s, sol.control[s][c]);
    emit("phi", k, s, sol.phi[s]);
    emit("phi_hat", k, s, sol.phi_hat[s]);
    emit("reaction", k, s, sol.reaction[s]);
  }
  write_manifest(dir, m);
}

Solution load_policy(const Config& cfg, const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  SnapshotFile phi1 = read_snapshot(dir / final_phi(m, dir).file);
  if (!(phi1.field.grid() == cfg.spec.grid))
    throw InvalidArgument(fmt::format("{}: snapshots are not on the config's grid", dir.string()));
  BackwardResult back = backward_solve(phi1.field, cfg.spec);
  Solution sol;
  sol.converged = m.converged;
  sol.iterations = m.iterations;
  for (Snapshot& s : back.buffer.snapshots) {
    sol.times.push_back(s.t);
    sol.steps.push_back(s.step);
    sol.control.push_back(control_field(s.field, cfg.spec));
  }
  return sol;
}

std::string verification_record(const Config& cfg, const EnsembleResult& r) {
  nlohmann::ordered_json j;
  j["n_particles"] = r.n_particles;
  j["seed"] = r.seed;
  j["bins"] = cfg.mc.bins;
  j["dt_mc"] = r.dt_mc;
  j["steps"] = r.steps;
  j["escaped"] = r.escaped;
  j["escaped_fraction"] = static_cast<double>(r.escaped) / static_cast<double>(r.n_particles);
  j["tv_to_target"] = r.tv_to_target;
  return j.dump();
}

namespace cli {

namespace {

/// Thrown when a config fails validation.
struct Refused {
  ValidationReport report;
};

Config prepare(const fs::path& path, const Options& opt) {
  Config cfg = load_config(path);
  if (opt.stride) {
    cfg.spec.buffer_stride = *opt.stride;
    cfg.validation = validate(cfg.spec);
  }
  if (opt.output) cfg.output.directory = *opt.output;
  if (opt.continuation) cfg.solver.continuation = true;
  if (!cfg.validation.ok()) throw Refused{cfg.validation};
  return cfg;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return kOk;
  } catch (const Refused& r) {
    fmt::print(err, "refusing to run: the problem fails validation\n");
    for (const std::string& f : r.report.failures) fmt::print(err, "  - {}\n", f);
    fmt::print(err, "{}\n", r.report.to_json());
    return kRefused;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kRuntimeError;
  }
}

}  // namespace

int solve(const fs::path& config, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = prepare(config, opt);
    const fs::path dir = cfg.output.directory;
    fs::create_directories(dir);
    OutputLock lock(dir);
    const SolveOutput result = solve_config(cfg, &err);
    write_solution(dir, cfg, result);
    const Solution& sol = result.solution;
    fmt::print(out, "{} after {} iterations (final err {}); wrote {}\n",
               sol.converged ? "converged" : "NOT converged", sol.iterations,
               sol.trace.empty() ? std::string("n/a") : fmt::format("{:.4e}", sol.trace.back().err), dir.string());
  });
}

int verify(const fs::path& config, const fs::path& dir, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = prepare(config, opt);
    OutputLock lock(dir);
    const Solution policy = load_policy(cfg, dir);
    McOptions mc;
    mc.n_particles = cfg.mc.n_particles;
    mc.seed = cfg.mc.seed;
    mc.bins = cfg.mc.bins;
    mc.dt_factor = cfg.mc.dt_factor;
    const EnsembleResult r = simulate(policy, cfg.spec, cfg.rho0, discretize_normalized(cfg.rho1, cfg.spec.grid), mc);
    const std::string line = verification_record(cfg, r);
    std::ofstream report(dir / "verification.jsonl", std::ios::binary | std::ios::app);
    if (!report) throw Error(fmt::format("cannot append to {}", (dir / "verification.jsonl").string()));
    report << line << '\n';
    fmt::print(out, "{}\n", line);
  });
}

int diagnose(const fs::path& config, const fs::path& dir, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = prepare(config, opt);
    OutputLock lock(dir);
    const Manifest m = read_manifest(dir);
    const fs::path ddir = dir / "diagnostics";
    fs::create_directories(ddir);

    Manifest dm;
    dm.converged = m.converged;
    dm.iterations = m.iterations;
    dm.tol = m.tol;
    dm.times = m.times;
    std::size_t k = 0;
    for (const ManifestEntry& e : m.files) {
      if (e.quantity != "phi") continue;
      const SnapshotFile phi = read_snapshot(dir / e.file);
      if (!(phi.field.grid() == cfg.spec.grid))
        throw InvalidArgument(fmt::format("{}: not on the config's grid", e.file));
      const ScalarField r = reaction_diagnostic(phi.field, e.t, cfg.spec);
      const std::string file = quantity_file("reaction", k++);
      write_snapshot(ddir / file, r, e.t, "reaction");
      dm.files.push_back({file, "reaction", e.t, e.step});
      fmt::print(out, "t={:.6f}  min(q_phi + q/lambda) = {:.6e}\n", e.t, r.min());
    }
    write_manifest(ddir, dm);
    std::ofstream v(ddir / "validation.json", std::ios::binary | std::ios::trunc);
    if (!v) throw Error(fmt::format("cannot write {}", (ddir / "validation.json").string()));
    v << cfg.validation.to_json() << '\n';
  });
}

}  // namespace cli
}  // namespace sbridge
