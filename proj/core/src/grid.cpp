#include "sbridge/grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sbridge/error.hpp"

namespace sbridge {

Grid2D::Grid2D(double x1_min, double x1_max, double x2_min, double x2_max,
               std::size_t nx, std::size_t ny)
    : x1_min_(x1_min), x1_max_(x1_max), x2_min_(x2_min), x2_max_(x2_max), nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3)
    throw InvalidArgument(fmt::format("grid needs at least 3 points per axis (got {}x{})", nx, ny));
  if (!(x1_max > x1_min) || !(x2_max > x2_min) || !std::isfinite(x1_max - x1_min) ||
      !std::isfinite(x2_max - x2_min))
    throw InvalidArgument("grid bounds must be finite with max > min");
  dx_ = (x1_max - x1_min) / static_cast<double>(nx - 1);
  dy_ = (x2_max - x2_min) / static_cast<double>(ny - 1);
}

bool Grid2D::contains(const Point& x) const noexcept {
  return x[0] >= x1_min_ && x[0] <= x1_max_ && x[1] >= x2_min_ && x[1] <= x2_max_;
}

ScalarField::ScalarField(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument(
        fmt::format("field has {} values but the grid has {} nodes", values_.size(), grid_.size()));
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

VectorField2::VectorField2(ScalarField a, ScalarField b) : v1(std::move(a)), v2(std::move(b)) {
  if (!(v1.grid() == v2.grid())) throw InvalidArgument("vector components live on different grids");
}

namespace {

enum class Axis { x1, x2 };

// First derivative along one axis. One-sided: first-order differences on the
// two end nodes. Reflecting: mirrored ghosts, so the end nodes get zero.
ScalarField first_derivative(const ScalarField& f, Axis axis, BoundaryStencil boundary) {
  const Grid2D& g = f.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  ScalarField out(g);
  if (axis == Axis::x1) {
    const double inv2h = 1.0 / (2.0 * g.dx()), invh = 1.0 / g.dx();
    for (std::size_t i = 1; i + 1 < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) out(i, j) = (f(i + 1, j) - f(i - 1, j)) * inv2h;
    for (std::size_t j = 0; j < ny; ++j) {
      if (boundary == BoundaryStencil::one_sided) {
        out(0, j) = (f(1, j) - f(0, j)) * invh;
        out(nx - 1, j) = (f(nx - 1, j) - f(nx - 2, j)) * invh;
      } else {
        out(0, j) = 0.0;
        out(nx - 1, j) = 0.0;
      }
    }
  } else {
    const double inv2h = 1.0 / (2.0 * g.dy()), invh = 1.0 / g.dy();
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 1; j + 1 < ny; ++j) out(i, j) = (f(i, j + 1) - f(i, j - 1)) * inv2h;
      if (boundary == BoundaryStencil::one_sided) {
        out(i, 0) = (f(i, 1) - f(i, 0)) * invh;
        out(i, ny - 1) = (f(i, ny - 1) - f(i, ny - 2)) * invh;
      } else {
        out(i, 0) = 0.0;
        out(i, ny - 1) = 0.0;
      }
    }
  }
  return out;
}

ScalarField second_derivative(const ScalarField& f, Axis axis, BoundaryStencil boundary) {
  const Grid2D& g = f.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  ScalarField out(g);
  if (axis == Axis::x1) {
    const double inv = 1.0 / (g.dx() * g.dx());
    for (std::size_t i = 1; i + 1 < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) out(i, j) = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * inv;
    for (std::size_t j = 0; j < ny; ++j) {
      if (boundary == BoundaryStencil::one_sided) {
        out(0, j) = out(1, j);
        out(nx - 1, j) = out(nx - 2, j);
      } else {
        out(0, j) = 2.0 * (f(1, j) - f(0, j)) * inv;
        out(nx - 1, j) = 2.0 * (f(nx - 2, j) - f(nx - 1, j)) * inv;
      }
    }
  } else {
    const double inv = 1.0 / (g.dy() * g.dy());
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 1; j + 1 < ny; ++j)
        out(i, j) = (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) * inv;
      if (boundary == BoundaryStencil::one_sided) {
        out(i, 0) = out(i, 1);
        out(i, ny - 1) = out(i, ny - 2);
      } else {
        out(i, 0) = 2.0 * (f(i, 1) - f(i, 0)) * inv;
        out(i, ny - 1) = 2.0 * (f(i, ny - 2) - f(i, ny - 1)) * inv;
      }
    }
  }
  return out;
}

}  // namespace

VectorField2 gradient(const ScalarField& f, BoundaryStencil boundary) {
  return VectorField2(first_derivative(f, Axis::x1, boundary), first_derivative(f, Axis::x2, boundary));
}

ScalarField laplacian_weighted(const ScalarField& f, const Mat2& sigma, BoundaryStencil boundary) {
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-14 * scale)
    throw InvalidArgument("weighted Laplacian needs a symmetric Sigma");

  ScalarField out(f.grid());
  if (sigma(0, 0) != 0.0) {
    const ScalarField fxx = second_derivative(f, Axis::x1, boundary);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sigma(0, 0) * fxx[k];
  }
  if (sigma(1, 1) != 0.0) {
    const ScalarField fyy = second_derivative(f, Axis::x2, boundary);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sigma(1, 1) * fyy[k];
  }
  if (sigma(0, 1) != 0.0) {
    // Composition of two central first differences is the centred cross stencil.
    const ScalarField fxy = first_derivative(first_derivative(f, Axis::x2, boundary), Axis::x1, boundary);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += 2.0 * sigma(0, 1) * fxy[k];
  }
  return out;
}

ScalarField divergence(const VectorField2& v, BoundaryStencil boundary) {
  if (boundary == BoundaryStencil::one_sided) {
    ScalarField out = first_derivative(v.v1, Axis::x1, boundary);
    const ScalarField d2 = first_derivative(v.v2, Axis::x2, boundary);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += d2[k];
    return out;
  }

  // Reflecting: node-centred control volumes with face fluxes averaged from
  // neighbouring nodes and zero flux through the wall faces.
  const Grid2D& g = v.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double inv2x = 1.0 / (2.0 * g.dx()), invx = 1.0 / g.dx();
  const double inv2y = 1.0 / (2.0 * g.dy()), invy = 1.0 / g.dy();
  const ScalarField& a = v.v1;
  const ScalarField& b = v.v2;
  ScalarField out(g);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      double d1;
      if (i == 0)
        d1 = (a(0, j) + a(1, j)) * invx;
      else if (i == nx - 1)
        d1 = -(a(nx - 1, j) + a(nx - 2, j)) * invx;
      else
        d1 = (a(i + 1, j) - a(i - 1, j)) * inv2x;
      double d2;
      if (j == 0)
        d2 = (b(i, 0) + b(i, 1)) * invy;
      else if (j == ny - 1)
        d2 = -(b(i, ny - 1) + b(i, ny - 2)) * invy;
      else
        d2 = (b(i, j + 1) - b(i, j - 1)) * inv2y;
      out(i, j) = d1 + d2;
    }
  }
  return out;
}

double integrate(const ScalarField& f) {
  const Grid2D& g = f.grid();
  double total = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double wi = (i == 0 || i + 1 == g.nx()) ? 0.5 : 1.0;
    double row = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
      const double wj = (j == 0 || j + 1 == g.ny()) ? 0.5 : 1.0;
      row += wj * f(i, j);
    }
    total += wi * row;
  }
  return total * g.dx() * g.dy();
}

namespace {

// Cell index and local coordinate in [0, 1] along one axis.
std::pair<std::size_t, double> locate(double x, double lo, double hi, double h, std::size_t n,
                                      const char* axis) {
  if (x < lo - h || x > hi + h || !std::isfinite(x))
    throw InvalidArgument(fmt::format("sample point {}={} lies more than one cell outside [{}, {}]",
                                      axis, x, lo, hi));
  x = std::clamp(x, lo, hi);
  const double s = (x - lo) / h;
  // Exact node coordinates map to integer positions, so node values come back bitwise.
  const double k = std::round(s);
  if (k >= 0.0 && k <= static_cast<double>(n - 1) && lo + k * h == x) {
    const auto node = static_cast<std::size_t>(k);
    const std::size_t c = std::min(node, n - 2);
    return {c, static_cast<double>(node - c)};
  }
  auto cell = static_cast<std::size_t>(std::floor(s));
  cell = std::min(cell, n - 2);
  return {cell, std::clamp(s - static_cast<double>(cell), 0.0, 1.0)};
}

}  // namespace

double bilinear_sample(const ScalarField& f, const Point& x) {
  const Grid2D& g = f.grid();
  const auto [i, s] = locate(x[0], g.x1_min(), g.x1_max(), g.dx(), g.nx(), "x1");
  const auto [j, r] = locate(x[1], g.x2_min(), g.x2_max(), g.dy(), g.ny(), "x2");
  return (1.0 - s) * (1.0 - r) * f(i, j) + s * (1.0 - r) * f(i + 1, j) + (1.0 - s) * r * f(i, j + 1) +
         s * r * f(i + 1, j + 1);
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out = a;
  out *= s;
  return out;
}

ScalarField log_field(const ScalarField& f, double floor) {
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::log(std::max(f[k], floor));
  return out;
}

}  // namespace sbridge
