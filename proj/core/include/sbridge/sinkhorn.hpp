#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sbridge/grid.hpp"
#include "sbridge/hilbert.hpp"
#include "sbridge/pde.hpp"
#include "sbridge/problem.hpp"

namespace sbridge {

/// Node-wise rho / max(phi, floor) with the relative positivity floor.
/// Throws DegenerateFieldError when the floor is active on more than 1% of
/// the nodes of phi.
ScalarField divide(const ScalarField& rho, const ScalarField& phi, double relative_floor = kRelativeFloor);

/// q_phi + q/lambda for a backward factor snapshot at time t.
ScalarField reaction_diagnostic(const ScalarField& phi_t, double t, const ProblemSpec& spec);

/// u = lambda R^-1 g' grad log phi, one field per control input. Inputs
/// whose gain row is structurally zero come out as exact zeros.
std::vector<ScalarField> control_field(const ScalarField& phi, const ProblemSpec& spec);

struct TraceEntry {
  int iteration = 0;
  double err = 0.0;  // max of the Hilbert distances between successive phi_hat_0 and phi_1
};

struct Solution {
  bool converged = false;
  int iterations = 0;
  std::vector<TraceEntry> trace;

  /// Recovery times: the buffer snapshot times of the final backward pass.
  std::vector<double> times;
  std::vector<int> steps;
  std::vector<ScalarField> rho;                    // phi_hat * phi
  std::vector<std::vector<ScalarField>> control;   // [snapshot][input] = lambda R^-1 g' grad log phi
  std::vector<ScalarField> reaction;               // q_phi + q/lambda
  std::vector<ScalarField> phi;                    // backward factor at the recovery times
  std::vector<ScalarField> phi_hat;                // forward factor at the recovery times

  /// phi_1 after the last boundary division; the warm start for a follow-up run.
  std::optional<ScalarField> phi1_next;

  /// g u at snapshot k: the control's contribution to the state velocity.
  VectorField2 applied_control(const ProblemSpec& spec, std::size_t k) const;
};

struct SinkhornOptions {
  double tol = 1e-2;
  int maxiter = 200;
  /// Keep every k-th buffer snapshot in the Solution (the endpoints are
  /// always kept).
  int recover_every = 1;
  /// Called after every completed epoch; err is empty on the first epoch.
  std::function<void(int iteration, std::optional<double> err)> on_iteration;
};

/// Sinkhorn iteration with memory. Each epoch: backward pass from phi_1 into
/// a trajectory buffer, phi_hat_0 = rho0 / phi_0, forward pass reading the
/// buffer, phi_1 = rho1 / phi_hat_1. The error is tracked from the second
/// epoch on. Non-convergence is reported through `converged`; numerical
/// failures propagate with the iteration index attached.
Solution run(const ProblemSpec& spec, const ScalarField& rho0, const ScalarField& rho1,
             const ScalarField& phi_init, const SinkhornOptions& options = {});

struct ContinuationStage {
  double scale = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Solves a ramp of problems with the mismatch matrix scaled by each factor,
/// feeding each stage's phi_1 into the next. Returns the final-stage solution.
Solution run_continuation(const ProblemSpec& spec, const ScalarField& rho0, const ScalarField& rho1,
                          const ScalarField& phi_init, const SinkhornOptions& options,
                          std::vector<ContinuationStage>* stages = nullptr,
                          const std::vector<double>& ramp = {0.0, 0.25, 0.5, 0.75, 1.0});

}  // namespace sbridge
