#include <cmath>

#include <gtest/gtest.h>

#include "scedex/error.hpp"
#include "scedex/gp_mle.hpp"
#include "scedex/mc.hpp"
#include "test_util.hpp"

namespace scedex {
namespace {

const RLookup kNoCross = [](std::size_t, std::size_t, double, double) { return 0.0; };

GpFit truth(double gamma, std::size_t k = 100) {
  GpFit f;
  f.gamma_hat = gamma;
  f.scale_hat = 1.0;
  f.k = k;
  return f;
}

TEST(SigmaGamma, SingleStationAtGammaZero) {
  const std::vector<double> c1{1.0};
  const auto sg = sigma_gamma0(0.0, c1, kNoCross);
  Eigen::Matrix2d expected;
  expected << 2, 1, 1, 1;
  EXPECT_LT((sg.sigma - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SigmaGamma, SameStationEntriesAtGammaQuarter) {
  // Frozen from an independent high-precision double integral.
  const std::vector<double> c1{1.0};
  const auto sg = sigma_gamma0(0.25, c1, kNoCross);
  EXPECT_NEAR(sg.sigma(0, 0), 1.0844444444444445, 1e-12);
  EXPECT_NEAR(sg.sigma(0, 1), 0.5555555555555556, 1e-12);
  EXPECT_NEAR(sg.sigma(1, 1), 0.6944444444444444, 1e-12);
}

TEST(MleAsymptoticCov, SingleStationIsTheClassicalMatrix) {
  const std::vector<double> c1{1.0};
  for (double g : {-0.3, 0.0, 0.25, 1.0}) {
    const auto cov = mle_asymptotic_cov(truth(g), c1, kNoCross);
    const double a = (1 + g) * (1 + g);
    EXPECT_NEAR(cov.matrix(0, 0), a, 1e-9) << g;
    EXPECT_NEAR(cov.matrix(0, 1), -(1 + g), 1e-9) << g;
    EXPECT_NEAR(cov.matrix(1, 0), -(1 + g), 1e-9) << g;
    EXPECT_NEAR(cov.matrix(1, 1), 1 + a, 1e-9) << g;
    EXPECT_NEAR(cov.se_gamma(), (1 + g) / 10.0, 1e-9);
  }
}

TEST(MleAsymptoticCov, IndependentStationsMatchOneStation) {
  const std::vector<double> one{1.0}, halves{0.5, 0.5};
  const auto a = mle_asymptotic_cov(truth(0.2), one, kNoCross);
  const auto b = mle_asymptotic_cov(truth(0.2), halves, kNoCross);
  EXPECT_LT((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SigmaGamma, ComonotoneCrossBlocksEqualTheSameStationForms) {
  // r_ij(s, t) = min(s, t) / 2 is exactly the same-station covariance with C = 1/2.
  const RLookup comonotone = [](std::size_t, std::size_t, double s, double t) { return 0.5 * std::min(s, t); };
  const std::vector<double> halves{0.5, 0.5};
  for (double g : {-0.4, -0.1, 0.0, 0.3, 1.0}) {
    const auto sg = sigma_gamma0(g, halves, comonotone);
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        const double same = sg.tau(2 * a, 2 * b);
        const double cross = sg.tau(2 * a, 2 * b + 1);
        EXPECT_NEAR(cross, same, 1e-6 * std::max(1.0, std::abs(same))) << g << " " << a << b;
      }
    }
    EXPECT_LE(sg.quadrature_error, 1e-6);
  }
}

TEST(SigmaGamma, TauIsSymmetricForUnequalStations) {
  SimSpec spec;
  spec.n = 10;
  spec.m = 3;
  spec.gamma = 0.1;
  spec.dependence = {DependenceKind::kLogistic, 0.6};
  spec.scedasis = {{1.0, 0.0}, {0.5, 0.0}, {2.0, 0.0}};
  spec.normalize();
  std::vector<double> c1(3);
  for (std::size_t j = 0; j < 3; ++j) c1[j] = spec.integrated(j, 1.0);
  const auto sg = sigma_gamma0(0.1, c1, spec_r_lookup(spec));
  EXPECT_LT((sg.tau - sg.tau.transpose()).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((sg.sigma - sg.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // A covariance matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sg.tau);
  EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-8);
}

TEST(SigmaGamma, GridPathAgreesWithQuadratureOfTheSameSurface) {
  const auto panel = testing::lcg_panel(3000, 2, 77);
  const auto pooled = pool(panel);
  const IntermediateK k{200};
  const TailCopulaGrid grid(panel, pooled, k, 16);
  ScedasisOptions opts;
  opts.renormalize_ties = true;
  const auto sced = scedasis_all(panel, pooled, k, opts);
  const std::vector<double> c1{sced.curves[0].c1, sced.curves[1].c1};
  const RLookup lookup = [&](std::size_t i, std::size_t j, double s, double t) { return grid(i, j, s, t); };
  for (double g : {-0.2, 0.0, 0.4}) {
    const auto exact = sigma_gamma0(g, c1, grid);
    // The interpolant is kinked at every node, so the generic rule converges slowly.
    QuadratureOptions q;
    q.tolerance = 1e-2;
    q.max_refinements = 2;
    const auto numeric = sigma_gamma0(g, c1, lookup, q);
    EXPECT_LT((exact.tau - numeric.tau).cwiseAbs().maxCoeff(), 1e-3) << g;
  }
}

TEST(SigmaGamma, RejectsGammaAtTheBoundAndBadC) {
  const std::vector<double> c1{1.0};
  EXPECT_THROW(sigma_gamma0(-0.5, c1, kNoCross), DomainError);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(sigma_gamma0(0.1, bad, kNoCross), DomainError);
}

}  // namespace
}  // namespace scedex
