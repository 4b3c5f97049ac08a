#pragma once

#include <vector>

#include <Eigen/Core>

#include "sbridge/grid.hpp"
#include "sbridge/rng.hpp"

namespace sbridge {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Mat2 covariance = Mat2::Identity();
};

/// Weighted sum of bivariate normals. Weights must be positive and sum to 1
/// within 1e-12; covariances must be symmetric positive definite.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  const std::vector<GaussianComponent>& components() const noexcept { return components_; }

  /// Free-space mixture density (not renormalised over any domain).
  double pdf(const Point& x) const;

  /// Draw from the mixture restricted to the grid rectangle by rejection.
  /// Throws Error after 10,000 consecutive rejections.
  Point sample(const Grid2D& bounds, Rng& rng) const;

 private:
  struct Prepared {
    Mat2 chol;       // lower Cholesky factor of the covariance
    Mat2 precision;  // inverse covariance
    double norm;     // weight / (2 pi sqrt(det))
  };

  std::vector<GaussianComponent> components_;
  std::vector<Prepared> prepared_;
};

/// Mixture density on every node, divided by its trapezoid integral. Throws
/// InvalidArgument when less than 1e-12 of the mass lies on the grid.
ScalarField discretize_normalized(const GaussianMixture& m, const Grid2D& grid);

}  // namespace sbridge
