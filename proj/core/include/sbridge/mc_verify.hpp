#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbridge/densities.hpp"
#include "sbridge/grid.hpp"
#include "sbridge/problem.hpp"
#include "sbridge/sinkhorn.hpp"

namespace sbridge {

struct EnsembleResult {
  int n_particles = 0;
  std::uint64_t seed = 0;
  std::vector<Point> initial;
  std::vector<Point> terminal;
  int escaped = 0;  // particles clamped onto a wall at least once
  double tv_to_target = 0.0;
  double dt_mc = 0.0;
  int steps = 0;
};

struct McOptions {
  int n_particles = 100000;
  std::uint64_t seed = 42;
  int bins = 50;
  /// SDE step as a multiple of the PDE step.
  double dt_factor = 10.0;
};

/// Euler-Maruyama simulation of dx = (f + g u) dt + sigma dW under the
/// recovered feedback u: zero-order hold in time over the solution
/// snapshots, bilinear in space. Particles start from `rho0` restricted to
/// the domain; a particle leaving the domain is clamped onto the wall.
/// Particle k draws only from make_stream(seed, k).
EnsembleResult simulate(const Solution& solution, const ProblemSpec& spec, const GaussianMixture& rho0,
                        const ScalarField& target, const McOptions& options = {});

/// 1/2 sum |p_hat - p| over a bins x bins partition of the domain. Cell
/// masses of the target come from bilinear sub-sampling of the field,
/// renormalised to 1. Throws InvalidArgument when bins < 2.
double tv_distance(std::span<const Point> points, const ScalarField& target, int bins);

}  // namespace sbridge
