#include "sbridge/pde.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sbridge/error.hpp"
#include "sbridge/hilbert.hpp"

namespace sbridge {

namespace {

constexpr double kBlowUpFactor = 1e12;
constexpr double kMaxFlooredFraction = 0.01;

// Mirrored-ghost neighbour indices along one axis.
struct Neighbours {
  std::size_t lo, hi;
};
inline Neighbours reflect(std::size_t i, std::size_t n) {
  return {i == 0 ? 1 : i - 1, i + 1 == n ? n - 2 : i + 1};
}

void require_positive(const ScalarField& f, const char* name, double t) {
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!(f[k] > 0.0) || !std::isfinite(f[k]))
      throw DegenerateFieldError(fmt::format("initial field is not strictly positive ({:.3g})", f[k]),
                                 {{}, t, k, name});
}

// Applies the relative floor and checks the blow-up bound. Returns the
// field's maximum.
double floor_and_check(ScalarField& f, double relative_floor, double bound, double t, const char* name) {
  double top = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double v = f[k];
    if (!std::isfinite(v)) throw BlowUpError("non-finite value", {{}, t, k, name});
    if (v > bound) throw BlowUpError(fmt::format("value {:.3g} exceeds blow-up bound {:.3g}", v, bound),
                                     {{}, t, k, name});
    top = std::max(top, v);
  }
  if (!(top > 0.0)) throw DegenerateFieldError("field collapsed to non-positive values", {{}, t, {}, name});
  const double floor = relative_floor * top;
  for (double& v : f.values()) v = std::max(v, floor);
  return top;
}

}  // namespace

const Snapshot& TrajectoryBuffer::at_or_before(int step) const {
  if (snapshots.empty()) throw InvalidArgument("empty trajectory buffer");
  auto it = std::upper_bound(snapshots.begin(), snapshots.end(), step,
                             [](int s, const Snapshot& snap) { return s < snap.step; });
  if (it == snapshots.begin()) throw InvalidArgument(fmt::format("buffer has no snapshot at or before step {}", step));
  return *std::prev(it);
}

std::vector<double> TrajectoryBuffer::times() const {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const Snapshot& s : snapshots) out.push_back(s.t);
  return out;
}

std::vector<int> snapshot_steps(int n_steps, int stride) {
  if (stride < 1) throw InvalidArgument("buffer stride must be positive");
  std::vector<int> steps;
  for (int k = 0; k < n_steps; k += stride) steps.push_back(k);
  steps.push_back(n_steps);
  return steps;
}

VectorField2 log_gradient(const ScalarField& phi, double relative_floor) {
  const double floor = relative_floor * phi.max();
  return gradient(log_field(phi, floor), BoundaryStencil::reflecting);
}

CouplingTerms coupling_terms(const ScalarField& phi, const Mat2& w, double relative_floor) {
  const double floor = relative_floor * phi.max();
  std::size_t floored = 0;
  for (double v : phi.values())
    if (!(v > floor)) ++floored;
  if (static_cast<double>(floored) > kMaxFlooredFraction * static_cast<double>(phi.size()))
    throw DegenerateFieldError(
        fmt::format("positivity floor active on {} of {} nodes", floored, phi.size()), {{}, {}, {}, "phi"});

  const VectorField2 g = gradient(log_field(phi, floor), BoundaryStencil::reflecting);
  CouplingTerms out{VectorField2(phi.grid()), ScalarField(phi.grid())};
  const double w11 = w(0, 0), w12 = w(0, 1), w22 = w(1, 1);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double a = g.v1[k], b = g.v2[k];
    const double fa = w11 * a + w12 * b;
    const double fb = w12 * a + w22 * b;
    out.f_phi.v1[k] = fa;
    out.f_phi.v2[k] = fb;
    out.q_phi[k] = 0.5 * (a * fa + b * fb);
  }
  return out;
}

CouplingTerms coupling_terms(const ScalarField& phi, const ProblemSpec& spec) {
  return coupling_terms(phi, mismatch_matrix(spec), spec.relative_floor);
}

ProblemFields::ProblemFields(const ProblemSpec& spec)
    : spec_(&spec),
      drift_timed_(spec.f1.depends_on(Expr::Var::t) || spec.f2.depends_on(Expr::Var::t)),
      cost_timed_(spec.q.depends_on(Expr::Var::t)),
      drift_t_(NAN),
      cost_t_(NAN),
      drift_(spec.grid),
      cost_(spec.grid) {}

const VectorField2& ProblemFields::drift(double t) {
  if (std::isnan(drift_t_) || (drift_timed_ && t != drift_t_)) {
    const Grid2D& g = spec_->grid;
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t j = 0; j < g.ny(); ++j) {
        drift_.v1(i, j) = spec_->f1.eval(t, g.x1(i), g.x2(j));
        drift_.v2(i, j) = spec_->f2.eval(t, g.x1(i), g.x2(j));
      }
    drift_t_ = t;
  }
  return drift_;
}

const ScalarField& ProblemFields::cost(double t) {
  if (std::isnan(cost_t_) || (cost_timed_ && t != cost_t_)) {
    const Grid2D& g = spec_->grid;
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t j = 0; j < g.ny(); ++j) cost_(i, j) = spec_->q.eval(t, g.x1(i), g.x2(j));
    cost_t_ = t;
  }
  return cost_;
}

BackwardResult backward_solve(const ScalarField& phi1, const ProblemSpec& spec) {
  if (!(phi1.grid() == spec.grid)) throw InvalidArgument("terminal factor is not on the problem grid");
  require_positive(phi1, "phi", spec.t1);

  const Grid2D& grid = spec.grid;
  const std::size_t nx = grid.nx(), ny = grid.ny();
  const int n = spec.n_steps();
  const double dt = spec.step();
  const Mat2 w = mismatch_matrix(spec);
  const Mat2 sig = spec.diffusion();
  const double inv_lambda = 1.0 / spec.lambda;
  const double c1 = 1.0 / (2.0 * grid.dx()), c2 = 1.0 / (2.0 * grid.dy());
  const double s11 = 0.5 * sig(0, 0) / (grid.dx() * grid.dx());
  const double s22 = 0.5 * sig(1, 1) / (grid.dy() * grid.dy());
  const double s12 = 0.5 * 2.0 * sig(0, 1) / (4.0 * grid.dx() * grid.dy());

  ProblemFields fields(spec);
  BackwardResult out{phi1, TrajectoryBuffer{spec.buffer_stride, n, spec.t0, dt, {}}};
  ScalarField& phi = out.phi0;
  const double bound = kBlowUpFactor * phi.max();

  std::vector<Snapshot>& snaps = out.buffer.snapshots;
  snaps.push_back({n, spec.t1, phi});
  ScalarField next(grid);

  // log(max(phi, floor)) of the current iterate; the coupling terms are
  // evaluated inline from its reflecting-stencil gradient.
  std::vector<double> logphi(grid.size());
  const double w11 = w(0, 0), w12 = w(0, 1), w22 = w(1, 1);
  const bool coupled = w11 != 0.0 || w12 != 0.0 || w22 != 0.0;
  double top = phi.max();
  const std::size_t max_floored = static_cast<std::size_t>(kMaxFlooredFraction * static_cast<double>(grid.size()));

  for (int k = n; k > 0; --k) {
    const double t = spec.t0 + k * dt;
    if (coupled) {
      const double floor = spec.relative_floor * top;
      std::size_t floored = 0;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const double v = phi[p];
        if (!(v > floor)) ++floored;
        logphi[p] = std::log(std::max(v, floor));
      }
      if (floored > max_floored)
        throw DegenerateFieldError(fmt::format("positivity floor active on {} of {} nodes", floored, grid.size()),
                                   {{}, t, {}, "phi"});
    }
    const VectorField2& f = fields.drift(t);
    const ScalarField& q = fields.cost(t);

    for (std::size_t i = 0; i < nx; ++i) {
      const auto [im, ip] = reflect(i, nx);
      const bool wall_i = i == 0 || i + 1 == nx;
      for (std::size_t j = 0; j < ny; ++j) {
        const auto [jm, jp] = reflect(j, ny);
        const bool wall_j = j == 0 || j + 1 == ny;
        const std::size_t p = grid.index(i, j);
        const std::size_t pe = grid.index(ip, j), pw = grid.index(im, j);
        const std::size_t pn = grid.index(i, jp), ps = grid.index(i, jm);
        const double c = phi[p];
        const double e = phi[pe], wst = phi[pw];
        const double nn = phi[pn], s = phi[ps];
        const double d1 = (e - wst) * c1;
        const double d2 = (nn - s) * c2;
        double diffusion = s11 * (e - 2.0 * c + wst) + s22 * (nn - 2.0 * c + s);
        if (s12 != 0.0)
          diffusion += s12 * ((phi[grid.index(ip, jp)] - phi[grid.index(ip, jm)]) -
                              (phi[grid.index(im, jp)] - phi[grid.index(im, jm)]));
        double a1 = f.v1[p], a2 = f.v2[p], r = q[p] * inv_lambda;
        if (coupled) {
          const double g1 = wall_i ? 0.0 : (logphi[pe] - logphi[pw]) * c1;
          const double g2 = wall_j ? 0.0 : (logphi[pn] - logphi[ps]) * c2;
          const double fa = w11 * g1 + w12 * g2;
          const double fb = w12 * g1 + w22 * g2;
          a1 += fa;
          a2 += fb;
          r += 0.5 * (g1 * fa + g2 * fb);
        }
        next[p] = c + dt * (d1 * a1 + d2 * a2 + diffusion - r * c);
      }
    }
    std::swap(phi, next);
    const double t_new = spec.t0 + (k - 1) * dt;  // k - 1 < n, never the endpoint t1
    top = floor_and_check(phi, spec.relative_floor, bound, t_new, "phi");
    if ((k - 1) % spec.buffer_stride == 0) snaps.push_back({k - 1, t_new, phi});
  }
  std::reverse(snaps.begin(), snaps.end());
  return out;
}

ForwardResult forward_solve_with_memory(const ScalarField& phi_hat0, const TrajectoryBuffer& buffer,
                                        const ProblemSpec& spec) {
  if (!(phi_hat0.grid() == spec.grid)) throw InvalidArgument("initial factor is not on the problem grid");
  const int n = spec.n_steps();
  if (buffer.snapshots.empty() || buffer.snapshots.front().step != 0 || buffer.snapshots.back().step != n)
    throw InvalidArgument("trajectory buffer does not cover the time horizon");
  require_positive(phi_hat0, "phi_hat", spec.t0);

  const Grid2D& grid = spec.grid;
  const std::size_t nx = grid.nx(), ny = grid.ny();
  const double dt = spec.step();
  const Mat2 w = mismatch_matrix(spec);
  const Mat2 sig = spec.diffusion();
  const double inv_lambda = 1.0 / spec.lambda;
  const double c1 = 1.0 / (2.0 * grid.dx()), c2 = 1.0 / (2.0 * grid.dy());
  const double e1 = 1.0 / grid.dx(), e2 = 1.0 / grid.dy();
  const double s11 = 0.5 * sig(0, 0) / (grid.dx() * grid.dx());
  const double s22 = 0.5 * sig(1, 1) / (grid.dy() * grid.dy());
  const double s12 = 0.5 * 2.0 * sig(0, 1) / (4.0 * grid.dx() * grid.dy());

  ProblemFields fields(spec);
  ForwardResult out{phi_hat0, {}};
  ScalarField& u = out.phi_hat1;
  const double bound = kBlowUpFactor * u.max();
  out.snapshots.reserve(buffer.snapshots.size());
  out.snapshots.push_back({0, spec.t0, u});
  std::size_t next_snapshot = 1;

  const Snapshot* held = nullptr;
  CouplingTerms coupling{VectorField2(grid), ScalarField(grid)};
  ScalarField next(grid);
  ScalarField flux1(grid), flux2(grid);

  for (int k = 0; k < n; ++k) {
    const double t = spec.t0 + k * dt;
    const Snapshot& snap = buffer.at_or_before(k);
    if (&snap != held) {
      try {
        coupling = coupling_terms(snap.field, w, spec.relative_floor);
      } catch (const DegenerateFieldError& e) {
        throw DegenerateFieldError(e.reason(), {{}, snap.t, e.site().node, "phi (buffer)"});
      }
      held = &snap;
    }
    const VectorField2& f = fields.drift(t);
    const ScalarField& q = fields.cost(t);
    for (std::size_t p = 0; p < u.size(); ++p) {
      flux1[p] = u[p] * (f.v1[p] + coupling.f_phi.v1[p]);
      flux2[p] = u[p] * (f.v2[p] + coupling.f_phi.v2[p]);
    }

    for (std::size_t i = 0; i < nx; ++i) {
      const auto [im, ip] = reflect(i, nx);
      for (std::size_t j = 0; j < ny; ++j) {
        const auto [jm, jp] = reflect(j, ny);
        const std::size_t p = grid.index(i, j);
        const double c = u[p];
        const double e = u[grid.index(ip, j)], wst = u[grid.index(im, j)];
        const double nn = u[grid.index(i, jp)], s = u[grid.index(i, jm)];

        // Flux divergence with zero flux through the walls (half cells).
        double div1;
        if (i == 0)
          div1 = (flux1[p] + flux1[grid.index(1, j)]) * e1;
        else if (i + 1 == nx)
          div1 = -(flux1[p] + flux1[grid.index(nx - 2, j)]) * e1;
        else
          div1 = (flux1[grid.index(i + 1, j)] - flux1[grid.index(i - 1, j)]) * c1;
        double div2;
        if (j == 0)
          div2 = (flux2[p] + flux2[grid.index(i, 1)]) * e2;
        else if (j + 1 == ny)
          div2 = -(flux2[p] + flux2[grid.index(i, ny - 2)]) * e2;
        else
          div2 = (flux2[grid.index(i, j + 1)] - flux2[grid.index(i, j - 1)]) * c2;

        double diffusion = s11 * (e - 2.0 * c + wst) + s22 * (nn - 2.0 * c + s);
        if (s12 != 0.0)
          diffusion += s12 * ((u[grid.index(ip, jp)] - u[grid.index(ip, jm)]) -
                              (u[grid.index(im, jp)] - u[grid.index(im, jm)]));
        const double reaction = (q[p] * inv_lambda + coupling.q_phi[p]) * c;
        next[p] = c + dt * (-(div1 + div2) + diffusion - reaction);
      }
    }
    std::swap(u, next);
    const double t_new = k + 1 == n ? spec.t1 : spec.t0 + (k + 1) * dt;
    floor_and_check(u, spec.relative_floor, bound, t_new, "phi_hat");
    if (next_snapshot < buffer.snapshots.size() && buffer.snapshots[next_snapshot].step == k + 1) {
      out.snapshots.push_back({k + 1, t_new, u});
      ++next_snapshot;
    }
  }
  return out;
}

}  // namespace sbridge
