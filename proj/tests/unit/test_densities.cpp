#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "sbridge/densities.hpp"
#include "sbridge/error.hpp"
#include "sbridge/rng.hpp"

using namespace sbridge;
using namespace sbridge::testing;

namespace {

const Grid2D kDomain(-1, 1, -1, 1, 101, 101);

// Exact cell masses of an isotropic mixture on a bins x bins partition,
// renormalised to the domain.
std::vector<double> cell_masses(const GaussianMixture& m, const Grid2D& g, int bins) {
  std::vector<double> p(static_cast<std::size_t>(bins * bins), 0.0);
  const double w1 = (g.x1_max() - g.x1_min()) / bins, w2 = (g.x2_max() - g.x2_min()) / bins;
  double total = 0.0;
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) {
      double v = 0.0;
      for (const auto& c : m.components()) {
        const double s = std::sqrt(c.covariance(0, 0));
        v += c.weight * isotropic_box_mass(c.mean(0), c.mean(1), s, g.x1_min() + a * w1, g.x1_min() + (a + 1) * w1,
                                           g.x2_min() + b * w2, g.x2_min() + (b + 1) * w2);
      }
      p[static_cast<std::size_t>(a * bins + b)] = v;
      total += v;
    }
  for (double& v : p) v /= total;
  return p;
}

double sampled_tv(const GaussianMixture& m, const Grid2D& g, int bins, int n, std::uint64_t seed) {
  const std::vector<double> exact = cell_masses(m, g, bins);
  std::vector<double> hist(exact.size(), 0.0);
  Rng rng(seed);
  const double w1 = (g.x1_max() - g.x1_min()) / bins, w2 = (g.x2_max() - g.x2_min()) / bins;
  for (int k = 0; k < n; ++k) {
    const Point x = m.sample(g, rng);
    const int a = std::min(bins - 1, static_cast<int>((x[0] - g.x1_min()) / w1));
    const int b = std::min(bins - 1, static_cast<int>((x[1] - g.x2_min()) / w2));
    hist[static_cast<std::size_t>(a * bins + b)] += 1.0 / n;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < hist.size(); ++k) tv += std::abs(hist[k] - exact[k]);
  return 0.5 * tv;
}

}  // namespace

TEST(GaussianMixture, PdfMatchesClosedForm) {
  const GaussianMixture m = pair_a_rho1();
  for (const Point x : {Point{0.0, 0.0}, Point{-0.4, 0.4}, Point{0.7, -0.2}}) {
    const double want = 0.5 * isotropic_pdf(-0.4, 0.4, 1.0 / 40, x[0], x[1]) +
                        0.5 * isotropic_pdf(-0.25, -0.25, 1.0 / 20, x[0], x[1]);
    EXPECT_NEAR(m.pdf(x), want, 1e-12 * want);
  }
}

TEST(GaussianMixture, AnisotropicPdfMatchesClosedForm) {
  Mat2 c;
  c << 0.04, 0.01, 0.01, 0.02;
  const GaussianMixture m({{1.0, Eigen::Vector2d(0.1, -0.2), c}});
  const double det = 0.04 * 0.02 - 0.01 * 0.01;
  const double d1 = 0.3 - 0.1, d2 = 0.1 + 0.2;
  const double quad = (0.02 * d1 * d1 - 2 * 0.01 * d1 * d2 + 0.04 * d2 * d2) / det;
  EXPECT_NEAR(m.pdf({0.3, 0.1}), std::exp(-0.5 * quad) / (2 * kPi * std::sqrt(det)), 1e-12);
}

TEST(GaussianMixture, RejectsInvalidWeightsAndCovariances) {
  EXPECT_THROW(GaussianMixture({}), InvalidArgument);
  EXPECT_THROW(GaussianMixture({isotropic(0.5, 0, 0, 0.1)}), InvalidArgument);
  EXPECT_THROW(GaussianMixture({isotropic(1.5, 0, 0, 0.1), isotropic(-0.5, 0, 0, 0.1)}), InvalidArgument);
  EXPECT_THROW(GaussianMixture({isotropic(1.0, 0, 0, 0.0)}), InvalidArgument);
  Mat2 nonsym;
  nonsym << 1.0, 0.2, 0.0, 1.0;
  EXPECT_THROW(GaussianMixture({{1.0, Eigen::Vector2d::Zero(), nonsym}}), InvalidArgument);
  Mat2 indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianMixture({{1.0, Eigen::Vector2d::Zero(), indefinite}}), InvalidArgument);
  EXPECT_NO_THROW(GaussianMixture({isotropic(1.0 / 3, 0, 0, 0.1), isotropic(1.0 / 3, 0, 0, 0.1),
                                   isotropic(1.0 / 3, 0, 0, 0.1)}));
}

TEST(Discretize, SingleGaussianIntegratesToOne) {
  const ScalarField r = discretize_normalized(pair_a_rho0(), kDomain);
  EXPECT_NEAR(integrate(r), 1.0, 1e-12);
  EXPECT_GT(r.min(), 0.0);
}

TEST(Discretize, FourComponentMixtureIsPointSymmetric) {
  const ScalarField r = discretize_normalized(pair_b_rho0(), kDomain);
  EXPECT_NEAR(integrate(r), 1.0, 1e-12);
  EXPECT_GT(r.min(), 0.0);
  const std::size_t n = kDomain.nx();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(r(i, j), r(n - 1 - i, n - 1 - j), 1e-12 * r.max());
}

TEST(Discretize, ShapeFollowsPdfUpToNormalisation) {
  const GaussianMixture m = pair_b_rho1();
  const ScalarField r = discretize_normalized(m, kDomain);
  const double c = r(50, 50) / m.pdf({kDomain.x1(50), kDomain.x2(50)});
  for (std::size_t k = 0; k < r.size(); k += 97) {
    const Point x{kDomain.x1(k / kDomain.ny()), kDomain.x2(k % kDomain.ny())};
    EXPECT_NEAR(r[k], c * m.pdf(x), 1e-12 * r.max());
  }
}

TEST(Discretize, MassOutsideDomainIsRejected) {
  const GaussianMixture far({isotropic(1.0, 30.0, 30.0, 0.01)});
  EXPECT_THROW(discretize_normalized(far, kDomain), InvalidArgument);
}

TEST(Sample, NearDeltaMixtureSamplesAtItsMean) {
  const GaussianMixture m({isotropic(1.0, 0.3, -0.6, 1e-14)});
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Point x = m.sample(kDomain, rng);
    EXPECT_NEAR(x[0], 0.3, 1e-5);
    EXPECT_NEAR(x[1], -0.6, 1e-5);
  }
}

TEST(Sample, EmpiricalMeanMatches) {
  const GaussianMixture m = pair_a_rho0();
  Rng rng(7);
  double s1 = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Point x = m.sample(kDomain, rng);
    ASSERT_TRUE(kDomain.contains(x));
    s1 += x[0];
    s2 += x[1];
  }
  EXPECT_NEAR(s1 / n, 0.25, 0.01);
  EXPECT_NEAR(s2 / n, -0.25, 0.01);
}

TEST(Sample, SameSeedSameDraws) {
  const GaussianMixture m = pair_b_rho0();
  Rng a(99), b(99);
  for (int k = 0; k < 500; ++k) EXPECT_EQ(m.sample(kDomain, a), m.sample(kDomain, b));
}

TEST(Sample, AbortsAfterTenThousandRejections) {
  const GaussianMixture far({isotropic(1.0, 10.0, 10.0, 0.01)});
  Rng rng(3);
  EXPECT_THROW(far.sample(kDomain, rng), Error);
}

TEST(DensitiesProperty, DiscretisedMassIsOneOnFineGrids) {
  Engine e(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(e, 41, 121));
    const Grid2D g(-1, 1, -1, 1, n, n);
    const int k = uniform_int(e, 1, 4);
    std::vector<GaussianComponent> cs;
    for (int c = 0; c < k; ++c)
      cs.push_back(isotropic(1.0 / k, uniform(e, -0.5, 0.5), uniform(e, -0.5, 0.5), uniform(e, 0.01, 0.1)));
    const ScalarField r = discretize_normalized(GaussianMixture(cs), g);
    EXPECT_NEAR(integrate(r), 1.0, 1e-12);
    EXPECT_GT(r.min(), 0.0);
  }
}

TEST(DensitiesProperty, SamplingMatchesExactCellMasses) {
  const int bins = 50, n = 1000000;
  EXPECT_LE(sampled_tv(pair_a_rho0(), kDomain, bins, n, 11), 0.05);
  EXPECT_LE(sampled_tv(pair_a_rho1(), kDomain, bins, n, 12), 0.05);
  EXPECT_LE(sampled_tv(pair_b_rho0(), kDomain, bins, n, 13), 0.05);
  EXPECT_LE(sampled_tv(pair_b_rho1(), kDomain, bins, n, 14), 0.05);
}
