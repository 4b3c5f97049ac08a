#include "sbridge/densities.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/core.h>

#include "sbridge/error.hpp"

namespace sbridge {

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
  double total = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const GaussianComponent& comp = components_[c];
    if (!(comp.weight > 0.0) || !std::isfinite(comp.weight))
      throw InvalidArgument(fmt::format("mixture component {} has non-positive weight", c));
    total += comp.weight;
    const Mat2& cov = comp.covariance;
    if (!cov.allFinite() || !comp.mean.allFinite())
      throw InvalidArgument(fmt::format("mixture component {} has non-finite parameters", c));
    if (std::abs(cov(0, 1) - cov(1, 0)) > 1e-14 * cov.cwiseAbs().maxCoeff())
      throw InvalidArgument(fmt::format("mixture component {} covariance is not symmetric", c));
    Eigen::LLT<Mat2> llt(cov);
    const double det = cov.determinant();
    if (llt.info() != Eigen::Success || !(cov(0, 0) > 0.0) || !(det > 0.0))
      throw InvalidArgument(fmt::format("mixture component {} covariance is not positive definite", c));
    prepared_.push_back({llt.matrixL(), cov.inverse(),
                         comp.weight / (2.0 * std::numbers::pi * std::sqrt(det))});
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument(fmt::format("mixture weights sum to {:.17g}, not 1", total));
}

double GaussianMixture::pdf(const Point& x) const {
  double p = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const Eigen::Vector2d d(x[0] - components_[c].mean(0), x[1] - components_[c].mean(1));
    p += prepared_[c].norm * std::exp(-0.5 * d.dot(prepared_[c].precision * d));
  }
  return p;
}

Point GaussianMixture::sample(const Grid2D& bounds, Rng& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kMaxRejections = 10000;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    std::size_t c = 0;
    if (components_.size() > 1) {
      double u = uniform(rng);
      while (c + 1 < components_.size() && u >= components_[c].weight) {
        u -= components_[c].weight;
        ++c;
      }
    }
    const Eigen::Vector2d z(normal(rng), normal(rng));
    const Eigen::Vector2d x = components_[c].mean + prepared_[c].chol * z;
    const Point p{x(0), x(1)};
    if (bounds.contains(p)) return p;
  }
  throw Error(fmt::format("mixture sampling rejected {} consecutive draws; mass lies outside the domain",
                          kMaxRejections));
}

ScalarField discretize_normalized(const GaussianMixture& m, const Grid2D& grid) {
  ScalarField rho = ScalarField::from_function(grid, [&](double x1, double x2) { return m.pdf({x1, x2}); });
  const double mass = integrate(rho);
  if (!(mass >= 1e-12))
    throw InvalidArgument(fmt::format("mixture has mass {:.3g} on the domain; below 1e-12", mass));
  rho *= 1.0 / mass;
  return rho;
}

}  // namespace sbridge
