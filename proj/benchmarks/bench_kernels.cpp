#include <benchmark/benchmark.h>

#include <cmath>

#include "sbridge/densities.hpp"
#include "sbridge/hilbert.hpp"
#include "sbridge/mc_verify.hpp"
#include "sbridge/pde.hpp"

namespace {

using namespace sbridge;

// The cubic spring-mass-damper problem on an n x n grid, integrated over a
// short horizon so one benchmark iteration stays in the millisecond range.
ProblemSpec spring_problem(std::size_t n, double horizon) {
  ProblemSpec s;
  s.f1 = Expr::parse("x2");
  s.f2 = Expr::parse("-x1^3 - x2");
  s.g = Eigen::MatrixXd(2, 1);
  s.g << 0.0, 1.0;
  s.sigma = Eigen::MatrixXd::Identity(2, 2);
  s.q = Expr::parse("0.5*(x1^2 + 2*x2^2)");
  s.R = Eigen::MatrixXd::Identity(1, 1);
  s.grid = Grid2D(-1.0, 1.0, -1.0, 1.0, n, n);
  const double h = 2.0 / static_cast<double>(n - 1);
  s.dt = 0.25 * h * h;
  s.t1 = horizon;
  return s;
}

ScalarField bump(const Grid2D& g) {
  return ScalarField::from_function(g, [](double x, double y) { return std::exp(-2.0 * (x * x + y * y)); });
}

void BM_BackwardStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ProblemSpec s = spring_problem(n, 0.0);
  s.t1 = 20 * s.dt;
  const ScalarField phi1 = bump(s.grid);
  for (auto _ : state) benchmark::DoNotOptimize(backward_solve(phi1, s).phi0[0]);
  state.SetItemsProcessed(state.iterations() * s.n_steps() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_BackwardStep)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_ForwardStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ProblemSpec s = spring_problem(n, 0.0);
  s.t1 = 20 * s.dt;
  const BackwardResult back = backward_solve(bump(s.grid), s);
  const ScalarField phi_hat0 = bump(s.grid);
  for (auto _ : state) benchmark::DoNotOptimize(forward_solve_with_memory(phi_hat0, back.buffer, s).phi_hat1[0]);
  state.SetItemsProcessed(state.iterations() * s.n_steps() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_ForwardStep)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_CouplingTerms(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemSpec s = spring_problem(n, 1.0);
  const ScalarField phi = bump(s.grid);
  const Mat2 w = mismatch_matrix(s);
  for (auto _ : state) benchmark::DoNotOptimize(coupling_terms(phi, w).q_phi[0]);
}
BENCHMARK(BM_CouplingTerms)->Arg(101);

void BM_HilbertDistance(benchmark::State& state) {
  const Grid2D g(-1.0, 1.0, -1.0, 1.0, 101, 101);
  const ScalarField u = bump(g);
  const ScalarField v = ScalarField::from_function(g, [](double x, double y) { return std::exp(x - y); });
  for (auto _ : state) benchmark::DoNotOptimize(hilbert_distance(u, v));
}
BENCHMARK(BM_HilbertDistance);

void BM_TvDistance(benchmark::State& state) {
  const Grid2D g(-1.0, 1.0, -1.0, 1.0, 101, 101);
  const GaussianMixture m({{1.0, Eigen::Vector2d(0.25, -0.25), Mat2::Identity() / 20.0}});
  const ScalarField target = discretize_normalized(m, g);
  Rng rng = make_stream(7, 0);
  std::vector<Point> pts;
  for (int k = 0; k < 100000; ++k) pts.push_back(m.sample(g, rng));
  for (auto _ : state) benchmark::DoNotOptimize(tv_distance(pts, target, 50));
}
BENCHMARK(BM_TvDistance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
