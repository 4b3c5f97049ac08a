#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sbridge {

using Mat2 = Eigen::Matrix2d;
using Point = std::array<double, 2>;

/// Uniform rectangular grid over [x1_min, x1_max] x [x2_min, x2_max].
///
/// Storage order for every field on the grid is row-major with i (the x1
/// index) outer and j (the x2 index) inner: node (i, j) lives at offset
/// i * ny + j.
class Grid2D {
 public:
  Grid2D(double x1_min, double x1_max, double x2_min, double x2_max,
         std::size_t nx, std::size_t ny);

  double x1_min() const noexcept { return x1_min_; }
  double x1_max() const noexcept { return x1_max_; }
  double x2_min() const noexcept { return x2_min_; }
  double x2_max() const noexcept { return x2_max_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double area() const noexcept { return (x1_max_ - x1_min_) * (x2_max_ - x2_min_); }

  double x1(std::size_t i) const noexcept { return x1_min_ + static_cast<double>(i) * dx_; }
  double x2(std::size_t j) const noexcept { return x2_min_ + static_cast<double>(j) * dy_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * ny_ + j; }

  bool contains(const Point& x) const noexcept;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  double x1_min_, x1_max_, x2_min_, x2_max_;
  std::size_t nx_, ny_;
  double dx_, dy_;
};

/// Scalar samples on every grid node.
class ScalarField {
 public:
  explicit ScalarField(const Grid2D& grid, double fill = 0.0);
  ScalarField(const Grid2D& grid, std::vector<double> values);

  /// Samples fn(x1, x2) on every node.
  template <typename Fn>
  static ScalarField from_function(const Grid2D& grid, Fn&& fn) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.nx(); ++i)
      for (std::size_t j = 0; j < grid.ny(); ++j)
        out(i, j) = fn(grid.x1(i), grid.x2(j));
    return out;
  }

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double max() const;
  double min() const;
  bool all_finite() const;

  ScalarField& operator*=(double s);

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

/// Two-component vector field; v1 along x1 and v2 along x2.
struct VectorField2 {
  explicit VectorField2(const Grid2D& grid) : v1(grid), v2(grid) {}
  VectorField2(ScalarField a, ScalarField b);

  const Grid2D& grid() const noexcept { return v1.grid(); }

  ScalarField v1;
  ScalarField v2;
};

/// How stencils treat the outermost rows and columns.
enum class BoundaryStencil {
  /// First-order one-sided differences (second differences for the
  /// Laplacian) built from interior nodes only.
  one_sided,
  /// Reflecting wall. Scalars get mirrored ghost nodes, so normal
  /// derivatives vanish on the wall; divergence uses a half-cell balance
  /// with zero flux through the wall, which keeps trapezoid mass exact.
  reflecting,
};

/// Central differences in the interior.
VectorField2 gradient(const ScalarField& f, BoundaryStencil boundary = BoundaryStencil::one_sided);

/// sum_ij d^2(Sigma_ij f)/dx_i dx_j for a constant symmetric Sigma. Throws
/// InvalidArgument on a non-symmetric Sigma.
ScalarField laplacian_weighted(const ScalarField& f, const Mat2& sigma,
                               BoundaryStencil boundary = BoundaryStencil::reflecting);

ScalarField divergence(const VectorField2& v, BoundaryStencil boundary = BoundaryStencil::one_sided);

/// Tensor-product trapezoid rule over the whole rectangle.
double integrate(const ScalarField& f);

/// Bilinear interpolation. Points up to one cell outside the domain are
/// clamped onto the boundary; points farther out throw InvalidArgument.
double bilinear_sample(const ScalarField& f, const Point& x);

// Node-wise helpers used throughout the solver.
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField log_field(const ScalarField& f, double floor);

}  // namespace sbridge
