#pragma once

#include <vector>

#include "sbridge/grid.hpp"
#include "sbridge/problem.hpp"

namespace sbridge {

/// A factor field recorded at time step `step` (t = t0 + step * dt).
struct Snapshot {
  int step = 0;
  double t = 0.0;
  ScalarField field;
};

/// Strided history of the backward factor from the latest backward pass.
///
/// Snapshots sit at every step index divisible by `stride`, plus the final
/// step n_steps, in increasing time order.
struct TrajectoryBuffer {
  int stride = 1;
  int n_steps = 0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Snapshot> snapshots;

  /// Zero-order hold: the latest snapshot whose step is <= `step`.
  const Snapshot& at_or_before(int step) const;
  std::vector<double> times() const;
};

/// Step indices at which snapshots are recorded for a pass of n_steps.
std::vector<int> snapshot_steps(int n_steps, int stride);

struct CouplingTerms {
  VectorField2 f_phi;  // W grad log phi
  ScalarField q_phi;   // 1/2 (grad log phi)' W grad log phi
};

/// Coupling drift and reaction induced by channel mismatch W. The gradient of
/// log phi uses reflecting-wall stencils. Throws DegenerateFieldError when the
/// positivity floor is active on more than 1% of the nodes.
CouplingTerms coupling_terms(const ScalarField& phi, const Mat2& w, double relative_floor = kRelativeFloor);
CouplingTerms coupling_terms(const ScalarField& phi, const ProblemSpec& spec);

/// grad log(max(phi, floor)) with the same stencil as coupling_terms.
VectorField2 log_gradient(const ScalarField& phi, double relative_floor = kRelativeFloor);

/// Drift f(t, .) and state cost q(t, .) on the grid, re-evaluated only when
/// the expressions depend on t.
class ProblemFields {
 public:
  explicit ProblemFields(const ProblemSpec& spec);
  const VectorField2& drift(double t);
  const ScalarField& cost(double t);

 private:
  const ProblemSpec* spec_;
  bool drift_timed_, cost_timed_;
  double drift_t_, cost_t_;
  VectorField2 drift_;
  ScalarField cost_;
};

struct BackwardResult {
  ScalarField phi0;
  TrajectoryBuffer buffer;
};

/// Explicit FTCS march of the backward factor equation from t1 to t0:
///   phi <- phi + dt [ <grad phi, f + f_phi> + 1/2 <Sigma, Hess phi> - (q/lambda + q_phi) phi ]
/// with reflecting walls, a relative positivity floor after every step, and
/// coupling terms recomputed from the current phi.
BackwardResult backward_solve(const ScalarField& phi1, const ProblemSpec& spec);

struct ForwardResult {
  ScalarField phi_hat1;
  std::vector<Snapshot> snapshots;  // at the buffer's snapshot steps
};

/// Explicit FTCS march of the forward factor equation from t0 to t1 in flux
/// form, with the coupling terms taken from `buffer` by zero-order hold:
///   phi_hat <- phi_hat + dt [ -div(phi_hat (f + f_phi)) + 1/2 Lap_Sigma phi_hat - (q/lambda + q_phi) phi_hat ]
ForwardResult forward_solve_with_memory(const ScalarField& phi_hat0, const TrajectoryBuffer& buffer,
                                        const ProblemSpec& spec);

}  // namespace sbridge
