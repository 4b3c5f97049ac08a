#include "sbridge/mc_verify.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sbridge/error.hpp"
#include "sbridge/rng.hpp"

namespace sbridge {

namespace {

std::size_t hold_index(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 0 : static_cast<std::size_t>(std::distance(times.begin(), it) - 1);
}

}  // namespace

EnsembleResult simulate(const Solution& solution, const ProblemSpec& spec, const GaussianMixture& rho0,
                        const ScalarField& target, const McOptions& options) {
  if (!solution.converged) throw InvalidArgument("Monte-Carlo verification needs a converged solution");
  if (options.n_particles < 1) throw InvalidArgument("need at least one particle");
  if (solution.control.empty() || solution.times.size() != solution.control.size())
    throw InvalidArgument("solution carries no control snapshots");
  if (!(options.dt_factor > 0.0)) throw InvalidArgument("dt_factor must be positive");

  const Grid2D& grid = spec.grid;
  const double horizon = spec.t1 - spec.t0;
  const int steps = std::max(1, static_cast<int>(std::lround(horizon / (options.dt_factor * spec.step()))));
  const double dt = horizon / steps;
  const double sqrt_dt = std::sqrt(dt);
  const auto m = static_cast<std::size_t>(spec.g.cols());
  const auto p = static_cast<Eigen::Index>(spec.sigma.cols());

  // Applied control g u per snapshot, so each step needs two bilinear lookups.
  std::vector<VectorField2> applied;
  applied.reserve(solution.control.size());
  for (std::size_t k = 0; k < solution.control.size(); ++k) {
    if (solution.control[k].size() != m) throw InvalidArgument("control snapshot has the wrong number of inputs");
    applied.push_back(solution.applied_control(spec, k));
  }

  EnsembleResult res;
  res.n_particles = options.n_particles;
  res.seed = options.seed;
  res.dt_mc = dt;
  res.steps = steps;
  res.initial.resize(static_cast<std::size_t>(options.n_particles));
  res.terminal.resize(static_cast<std::size_t>(options.n_particles));

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(p);
  for (int n = 0; n < options.n_particles; ++n) {
    Rng rng = make_stream(options.seed, static_cast<std::uint64_t>(n));
    normal.reset();
    Point x = rho0.sample(grid, rng);
    res.initial[static_cast<std::size_t>(n)] = x;
    bool clamped = false;
    for (int k = 0; k < steps; ++k) {
      const double t = spec.t0 + k * dt;
      const VectorField2& u = applied[hold_index(solution.times, t)];
      for (Eigen::Index c = 0; c < p; ++c) xi(c) = normal(rng);
      const Eigen::Vector2d noise = spec.sigma * xi;
      const double v1 = spec.f1.eval(t, x[0], x[1]) + bilinear_sample(u.v1, x);
      const double v2 = spec.f2.eval(t, x[0], x[1]) + bilinear_sample(u.v2, x);
      x[0] += v1 * dt + sqrt_dt * noise(0);
      x[1] += v2 * dt + sqrt_dt * noise(1);
      if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
        throw Error(fmt::format("particle {} reached a non-finite state at t={:.6g}", n, t + dt));
      if (!grid.contains(x)) {
        x[0] = std::clamp(x[0], grid.x1_min(), grid.x1_max());
        x[1] = std::clamp(x[1], grid.x2_min(), grid.x2_max());
        clamped = true;
      }
    }
    res.terminal[static_cast<std::size_t>(n)] = x;
    if (clamped) ++res.escaped;
  }
  res.tv_to_target = tv_distance(res.terminal, target, options.bins);
  return res;
}

double tv_distance(std::span<const Point> points, const ScalarField& target, int bins) {
  if (bins < 2) throw InvalidArgument("tv_distance needs at least 2 bins per axis");
  if (points.empty()) throw InvalidArgument("tv_distance needs at least one point");
  const Grid2D& g = target.grid();
  const auto nb = static_cast<std::size_t>(bins);
  const double w1 = (g.x1_max() - g.x1_min()) / bins;
  const double w2 = (g.x2_max() - g.x2_min()) / bins;

  // Midpoint sub-sampling of the bilinear interpolant, at least two samples
  // per grid spacing inside every cell.
  const auto sub = static_cast<std::size_t>(std::max(2.0, 2.0 * std::ceil(std::max(w1 / g.dx(), w2 / g.dy()))));
  std::vector<double> mass(nb * nb, 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      double acc = 0.0;
      for (std::size_t r = 0; r < sub; ++r) {
        for (std::size_t s = 0; s < sub; ++s) {
          const double x1 = g.x1_min() + (static_cast<double>(a) + (r + 0.5) / sub) * w1;
          const double x2 = g.x2_min() + (static_cast<double>(b) + (s + 0.5) / sub) * w2;
          acc += bilinear_sample(target, {x1, x2});
        }
      }
      const double cell = std::max(0.0, acc / static_cast<double>(sub * sub)) * w1 * w2;
      mass[a * nb + b] = cell;
      total += cell;
    }
  }
  if (!(total > 0.0)) throw InvalidArgument("target field has no positive mass");

  std::vector<double> counts(nb * nb, 0.0);
  for (const Point& x : points) {
    const auto a = std::min(nb - 1, static_cast<std::size_t>(std::max(0.0, std::floor((x[0] - g.x1_min()) / w1))));
    const auto b = std::min(nb - 1, static_cast<std::size_t>(std::max(0.0, std::floor((x[1] - g.x2_min()) / w2))));
    counts[a * nb + b] += 1.0;
  }
  const double n = static_cast<double>(points.size());
  double tv = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c) tv += std::abs(counts[c] / n - mass[c] / total);
  return 0.5 * tv;
}

}  // namespace sbridge
