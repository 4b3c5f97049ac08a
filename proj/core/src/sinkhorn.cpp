#include "sbridge/sinkhorn.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sbridge/error.hpp"
#include "sbridge/hilbert.hpp"

namespace sbridge {

ScalarField divide(const ScalarField& rho, const ScalarField& phi, double relative_floor) {
  if (!(rho.grid() == phi.grid())) throw InvalidArgument("division of fields on different grids");
  const double floor = relative_floor * phi.max();
  if (!(floor > 0.0) || !std::isfinite(floor))
    throw DegenerateFieldError("divisor has no positive finite maximum", {{}, {}, {}, "divisor"});
  std::size_t floored = 0;
  ScalarField out(rho.grid());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (rho[k] < 0.0) throw InvalidArgument(fmt::format("negative density {:.3g} at node {}", rho[k], k));
    if (!(phi[k] > floor)) ++floored;
    out[k] = rho[k] / std::max(phi[k], floor);
  }
  if (static_cast<double>(floored) > 0.01 * static_cast<double>(rho.size()))
    throw DegenerateFieldError(fmt::format("positivity floor active on {} of {} divisor nodes", floored, rho.size()),
                               {{}, {}, {}, "divisor"});
  return out;
}

ScalarField reaction_diagnostic(const ScalarField& phi_t, double t, const ProblemSpec& spec) {
  CouplingTerms c = coupling_terms(phi_t, spec);
  const Grid2D& g = spec.grid;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) c.q_phi(i, j) += spec.q.eval(t, g.x1(i), g.x2(j)) / spec.lambda;
  return std::move(c.q_phi);
}

VectorField2 Solution::applied_control(const ProblemSpec& spec, std::size_t k) const {
  const std::vector<ScalarField>& u = control.at(k);
  VectorField2 out(u.front().grid());
  for (std::size_t p = 0; p < out.v1.size(); ++p) {
    double a = 0.0, b = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
      a += spec.g(0, static_cast<Eigen::Index>(c)) * u[c][p];
      b += spec.g(1, static_cast<Eigen::Index>(c)) * u[c][p];
    }
    out.v1[p] = a;
    out.v2[p] = b;
  }
  return out;
}

std::vector<ScalarField> control_field(const ScalarField& phi, const ProblemSpec& spec) {
  const Eigen::MatrixXd gain = control_gain(spec);
  const VectorField2 grad = log_gradient(phi, spec.relative_floor);
  std::vector<ScalarField> u;
  for (Eigen::Index c = 0; c < gain.rows(); ++c) {
    ScalarField uc(phi.grid());
    const double a = gain(c, 0), b = gain(c, 1);
    for (std::size_t p = 0; p < uc.size(); ++p) uc[p] = (a == 0.0 ? 0.0 : a * grad.v1[p]) + (b == 0.0 ? 0.0 : b * grad.v2[p]);
    u.push_back(std::move(uc));
  }
  return u;
}

Solution run(const ProblemSpec& spec, const ScalarField& rho0, const ScalarField& rho1, const ScalarField& phi_init,
             const SinkhornOptions& options) {
  if (!(rho0.grid() == spec.grid) || !(rho1.grid() == spec.grid) || !(phi_init.grid() == spec.grid))
    throw InvalidArgument("endpoint densities and initial guess must live on the problem grid");
  if (options.maxiter < 1) throw InvalidArgument("maxiter must be at least 1");
  if (options.recover_every < 1) throw InvalidArgument("recover_every must be at least 1");

  Solution sol;
  ScalarField phi1 = phi_init;
  std::optional<ScalarField> phi_hat0;
  std::optional<BackwardResult> back;
  std::optional<ForwardResult> fwd;

  int it = 1;
  for (; it <= options.maxiter; ++it) {
    try {
      const ScalarField phi1_old = phi1;
      std::optional<ScalarField> phi_hat0_old = std::move(phi_hat0);

      back.reset();
      back = backward_solve(phi1, spec);
      phi_hat0 = divide(rho0, back->phi0, spec.relative_floor);
      fwd.reset();
      fwd = forward_solve_with_memory(*phi_hat0, back->buffer, spec);
      phi1 = divide(rho1, fwd->phi_hat1, spec.relative_floor);

      std::optional<double> err;
      if (phi_hat0_old) {
        // The division outputs are unfloored; the metric is taken on their
        // floored images, as the kernels see them.
        const double fl = spec.relative_floor;
        err = std::max(hilbert_distance(apply_relative_floor(*phi_hat0, fl), apply_relative_floor(*phi_hat0_old, fl),
                                        "phi_hat0", "phi_hat0_old", fl),
                       hilbert_distance(apply_relative_floor(phi1, fl), apply_relative_floor(phi1_old, fl), "phi1",
                                        "phi1_old", fl));
        sol.trace.push_back({it, *err});
      }
      if (options.on_iteration) options.on_iteration(it, err);
      if (err && *err <= options.tol) {
        sol.converged = true;
        break;
      }
    } catch (const NumericalError& e) {
      e.rethrow_at_iteration(it);
    }
  }
  sol.iterations = std::min(it, options.maxiter);
  sol.phi1_next = phi1;

  const std::vector<Snapshot>& snaps = back->buffer.snapshots;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const bool endpoint = k == 0 || k + 1 == snaps.size();
    if (!endpoint && k % static_cast<std::size_t>(options.recover_every) != 0) continue;
    const ScalarField& phi_t = snaps[k].field;
    const ScalarField& phi_hat_t = fwd->snapshots.at(k).field;
    sol.times.push_back(snaps[k].t);
    sol.steps.push_back(snaps[k].step);
    sol.rho.push_back(phi_hat_t * phi_t);
    sol.control.push_back(control_field(phi_t, spec));
    sol.reaction.push_back(reaction_diagnostic(phi_t, snaps[k].t, spec));
    sol.phi.push_back(phi_t);
    sol.phi_hat.push_back(phi_hat_t);
  }
  return sol;
}

Solution run_continuation(const ProblemSpec& spec, const ScalarField& rho0, const ScalarField& rho1,
                          const ScalarField& phi_init, const SinkhornOptions& options,
                          std::vector<ContinuationStage>* stages, const std::vector<double>& ramp) {
  if (ramp.empty()) throw InvalidArgument("continuation ramp is empty");
  ScalarField guess = phi_init;
  Solution sol;
  for (double scale : ramp) {
    ProblemSpec stage = spec;
    stage.mismatch_scale = spec.mismatch_scale * scale;
    sol = run(stage, rho0, rho1, guess, options);
    if (stages) stages->push_back({scale, sol.converged, sol.iterations});
    guess = *sol.phi1_next;
  }
  return sol;
}

}  // namespace sbridge
