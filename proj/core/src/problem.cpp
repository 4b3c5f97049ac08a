#include "sbridge/problem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "json.hpp"

namespace sbridge {

namespace {

constexpr double kCflSafety = 0.9;

bool symmetric(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Eigen::MatrixXd checked_r_inverse(const Eigen::MatrixXd& R) {
  if (R.rows() == 0 || !symmetric(R) || !R.allFinite())
    throw InvalidArgument("control weight R must be a finite symmetric matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw InvalidArgument("control weight R is not positive definite");
  // LLT succeeds on some semidefinite inputs; guard on the smallest eigenvalue too.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw InvalidArgument("control weight R is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
}

Mat2 raw_mismatch(const ProblemSpec& spec) {
  if (spec.g.rows() != 2) throw InvalidArgument("input map g must have 2 rows");
  if (spec.R.rows() != spec.g.cols() || spec.R.cols() != spec.g.cols())
    throw InvalidArgument(fmt::format("control weight R must be {0}x{0} to match g", spec.g.cols()));
  const Eigen::MatrixXd rinv = checked_r_inverse(spec.R);
  const Eigen::MatrixXd ggt = spec.lambda * spec.g * rinv * spec.g.transpose();
  Mat2 w = ggt - spec.diffusion();
  // Exact symmetry: the product above is symmetric up to rounding.
  w(0, 1) = w(1, 0) = 0.5 * (w(0, 1) + w(1, 0));
  return w;
}

bool psd2(const Mat2& m, double tol) {
  return m(0, 0) >= -tol && m(1, 1) >= -tol && m.determinant() >= -tol * std::max(1.0, m.squaredNorm());
}

}  // namespace

Mat2 ProblemSpec::diffusion() const {
  if (sigma.rows() != 2) throw InvalidArgument("noise map sigma must have 2 rows");
  Mat2 s = sigma * sigma.transpose();
  s(0, 1) = s(1, 0) = 0.5 * (s(0, 1) + s(1, 0));
  return s;
}

int ProblemSpec::n_steps() const {
  if (!(t1 > t0) || !(dt > 0.0)) throw InvalidArgument("time horizon needs t0 < t1 and dt > 0");
  return std::max(1, static_cast<int>(std::lround((t1 - t0) / dt)));
}

double ProblemSpec::step() const { return (t1 - t0) / static_cast<double>(n_steps()); }

Mat2 mismatch_matrix(const ProblemSpec& spec) { return spec.mismatch_scale * raw_mismatch(spec); }

Eigen::MatrixXd control_gain(const ProblemSpec& spec) {
  return spec.lambda * checked_r_inverse(spec.R) * spec.g.transpose();
}

ValidationReport validate(const ProblemSpec& spec) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) { rep.failures.push_back(std::move(msg)); };

  bool shapes_ok = true;
  if (spec.g.rows() != 2 || spec.g.cols() < 1) {
    fail("input map g must be 2 x m with m >= 1");
    shapes_ok = false;
  }
  if (spec.sigma.rows() != 2 || spec.sigma.cols() < 1) {
    fail("noise map sigma must be 2 x p with p >= 1");
    shapes_ok = false;
  }
  if (!spec.g.allFinite() || !spec.sigma.allFinite()) {
    fail("g and sigma must be finite");
    shapes_ok = false;
  }
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) {
    fail("lambda must be positive");
    shapes_ok = false;
  }
  if (!(spec.t1 > spec.t0)) fail("time horizon needs t0 < t1");
  if (!(spec.dt > 0.0)) fail("dt must be positive");
  if (spec.buffer_stride < 1) fail("buffer_stride must be a positive integer");
  if (!(spec.relative_floor > 0.0 && spec.relative_floor < 1.0)) fail("relative_floor must lie in (0, 1)");

  if (shapes_ok) {
    const Mat2 sig = spec.diffusion();
    if (!(sig(0, 0) > 0.0) || !(sig(1, 1) > 0.0))
      fail("diffusion tensor needs strictly positive diagonal entries for the explicit scheme");

    if (spec.t1 > spec.t0 && spec.dt > 0.0) {
      const Grid2D& gr = spec.grid;
      const double h2 = std::min(gr.dx() * gr.dx(), gr.dy() * gr.dy());
      const double denom = sig(0, 0) + sig(1, 1) + std::abs(sig(0, 1));
      rep.dt = spec.step();
      rep.dt_bound = denom > 0.0 ? kCflSafety * h2 / denom : INFINITY;
      rep.cfl_ok = rep.dt <= rep.dt_bound;
      if (!rep.cfl_ok)
        fail(fmt::format("CFL violated: dt={:.6g} exceeds the admissible bound {:.6g}", rep.dt, rep.dt_bound));
    }

    try {
      const Mat2 w = raw_mismatch(spec);
      rep.mismatch = spec.mismatch_scale * w;
      rep.mismatch_norm_inf = rep.mismatch.cwiseAbs().rowwise().sum().maxCoeff();
      const double tol = 1e-12 * std::max(1.0, sig.cwiseAbs().maxCoeff());
      rep.matched_channel = w.cwiseAbs().maxCoeff() <= tol;
      rep.mismatch_psd = psd2(rep.mismatch, tol);
      if (!rep.matched_channel && spec.lambda != 1.0)
        fail("lambda must be 1 when the input and noise channels do not match");
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
  }

  // Sample q and f on every node at the start, middle and end of the horizon.
  rep.q_min = INFINITY;
  bool eval_ok = true;
  const Grid2D& gr = spec.grid;
  for (double t : {spec.t0, 0.5 * (spec.t0 + spec.t1), spec.t1}) {
    for (std::size_t i = 0; i < gr.nx() && eval_ok; ++i) {
      for (std::size_t j = 0; j < gr.ny(); ++j) {
        const double x1 = gr.x1(i), x2 = gr.x2(j);
        try {
          rep.q_min = std::min(rep.q_min, spec.q.eval(t, x1, x2));
          spec.f1.eval(t, x1, x2);
          spec.f2.eval(t, x1, x2);
        } catch (const EvalError& e) {
          fail(fmt::format("expression evaluation failed at t={} x=({}, {}): {}", t, x1, x2, e.what()));
          eval_ok = false;
          break;
        }
      }
    }
  }
  rep.q_nonnegative = eval_ok && rep.q_min >= 0.0;
  if (eval_ok && !rep.q_nonnegative)
    fail(fmt::format("state cost q is negative somewhere on the grid (min {:.6g})", rep.q_min));
  return rep;
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["ok"] = ok();
  j["cfl"] = {{"pass", cfl_ok}, {"dt", dt}, {"dt_bound", dt_bound}};
  j["mismatch"] = {{"W", {{mismatch(0, 0), mismatch(0, 1)}, {mismatch(1, 0), mismatch(1, 1)}}},
                   {"norm_inf", mismatch_norm_inf},
                   {"psd", mismatch_psd},
                   {"matched_channel", matched_channel}};
  j["q"] = {{"nonnegative", q_nonnegative}, {"min", std::isfinite(q_min) ? q_min : 0.0}};
  j["failures"] = failures;
  return j.dump(2);
}

}  // namespace sbridge
