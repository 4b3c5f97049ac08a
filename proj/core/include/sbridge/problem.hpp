#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sbridge/expr.hpp"
#include "sbridge/grid.hpp"
#include "sbridge/hilbert.hpp"

namespace sbridge {

/// A control-affine bridge instance:
///   dx = (f(t,x) + g u) dt + sigma dW,   cost  E int (1/2 u'Ru + q(t,x)) dt
/// on a rectangular grid, with the time step of the explicit PDE solver.
///
/// g, sigma and R are constant matrices.
struct ProblemSpec {
  Expr f1 = Expr::constant(0.0);
  Expr f2 = Expr::constant(0.0);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);      // 2 x m
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);  // 2 x p
  Expr q = Expr::constant(0.0);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);      // m x m
  double lambda = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-3;
  Grid2D grid{-1.0, 1.0, -1.0, 1.0, 21, 21};
  int buffer_stride = 10;
  /// Multiplies the mismatch matrix; 1 for the real problem, smaller values
  /// for warm-start continuation stages.
  double mismatch_scale = 1.0;
  /// Positivity floor relative to a field's maximum, used by the kernels,
  /// the boundary divisions and the convergence metric.
  double relative_floor = kRelativeFloor;

  int inputs() const { return static_cast<int>(g.cols()); }
  /// Sigma = sigma sigma'.
  Mat2 diffusion() const;
  /// Number of time steps, round((t1 - t0) / dt).
  int n_steps() const;
  /// dt adjusted so that n_steps() steps span [t0, t1] exactly.
  double step() const;
};

/// W = lambda g R^-1 g' - Sigma, times mismatch_scale. Throws
/// InvalidArgument when R is not symmetric positive definite.
Mat2 mismatch_matrix(const ProblemSpec& spec);

/// lambda R^-1 g', the m x 2 map from grad log phi to the optimal control.
Eigen::MatrixXd control_gain(const ProblemSpec& spec);

struct ValidationReport {
  bool cfl_ok = false;
  double dt = 0.0;
  double dt_bound = 0.0;           // 0.9 min(dx^2, dy^2) / (S11 + S22 + |S12|)
  Mat2 mismatch = Mat2::Zero();
  double mismatch_norm_inf = 0.0;  // max absolute row sum of W
  bool mismatch_psd = false;       // W >= 0
  bool matched_channel = false;    // W == 0
  bool q_nonnegative = false;
  double q_min = 0.0;
  std::vector<std::string> failures;  // hard failures; the solver refuses to run on any

  bool ok() const { return failures.empty(); }
  std::string to_json() const;
};

/// Checks every hard invariant and reports soft diagnostics. Never throws on
/// invalid specs; problems land in `failures`.
ValidationReport validate(const ProblemSpec& spec);

}  // namespace sbridge
