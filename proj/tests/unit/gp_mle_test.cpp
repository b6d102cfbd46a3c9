#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "scedex/error.hpp"
#include "scedex/gp_mle.hpp"
#include "test_util.hpp"

namespace scedex {
namespace {

std::vector<double> gp_sample(double gamma, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<double> x(n);
  for (auto& v : x) {
    const double u = (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
    v = gamma == 0.0 ? -sigma * std::log(u) : sigma * std::expm1(-gamma * std::log(u)) / gamma;
  }
  return x;
}

TEST(GpLoglik, HandValues) {
  const std::vector<double> one{1.0}, two{2.0};
  EXPECT_NEAR(gp_loglik(1.0, 1.0, one), -2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(gp_loglik(0.0, 2.0, two), -std::log(2.0) - 1.0, 1e-15);
}

TEST(GpLoglik, SupportViolationNamesTheExcess) {
  const std::vector<double> x{1.0, 2.5};
  try {
    gp_loglik(-0.5, 1.0, x);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("#2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(gp_loglik(0.1, 0.0, x), DomainError);
}

TEST(GpLoglik, TaylorBranchMatchesTheClosedForm) {
  const auto x = gp_sample(0.0, 1.0, 200, 3);
  // Either side of the cutoff, against a long-double evaluation of the closed form.
  for (double g : {-2e-6, -9.9e-7, -1e-7, 1e-7, 9.9e-7, 2e-6}) {
    long double ref = 0.0L;
    for (double xi : x) {
      const long double y = static_cast<long double>(xi) / 1.3L;
      ref += -std::log(1.3L) - (1.0L + 1.0L / g) * std::log1p(static_cast<long double>(g) * y);
    }
    EXPECT_NEAR(gp_loglik(g, 1.3, x), static_cast<double>(ref), 1e-9 * std::abs(static_cast<double>(ref))) << g;
  }
}

TEST(FisherInfo, ClosedFormAndInverseOnAGrid) {
  Eigen::Matrix2d at_zero;
  at_zero << 2, 1, 1, 1;
  EXPECT_TRUE(fisher_info(0.0).isApprox(at_zero, 1e-15));
  Eigen::Matrix2d inv_zero;
  inv_zero << 1, -1, -1, 2;
  EXPECT_TRUE(fisher_info_inverse(0.0).isApprox(inv_zero, 1e-15));
  EXPECT_NEAR(fisher_info(0.0).determinant(), 1.0, 1e-15);
  for (double g = -0.45; g <= 2.0 + 1e-12; g += 0.05) {
    const Eigen::Matrix2d prod = fisher_info(g) * fisher_info_inverse(g);
    EXPECT_LT((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12) << g;
  }
  EXPECT_THROW(fisher_info(-0.5), DomainError);
  EXPECT_THROW(fisher_info_inverse(-0.7), DomainError);
}

TEST(FitGp, RecoversGammaQuarterOnLargeSample) {
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = gp_sample(0.25, 1.0, 10000, seed);
    const auto fit = fit_gp_excesses(x);
    EXPECT_TRUE(fit.converged);
    EXPECT_LT(fit.score_norm, 1e-8);
    EXPECT_TRUE(fit.hessian_negative_definite);
    if (std::abs(fit.gamma_hat - 0.25) < 0.0375) ++inside;
  }
  EXPECT_GE(inside, 9);
}

TEST(FitGp, ExponentialExcessesGiveGammaNearZero) {
  const auto x = gp_sample(0.0, 2.0, 20000, 11);
  const auto fit = fit_gp_excesses(x);
  EXPECT_NEAR(fit.gamma_hat, 0.0, 3.0 / std::sqrt(20000.0));
  EXPECT_NEAR(fit.scale_hat, 2.0, 2.0 * 3.0 * std::sqrt(2.0 / 20000.0));
}

TEST(FitGp, ScoreOfTheClosedFormVanishesAtTheOptimum) {
  for (double g0 : {-0.3, 0.0, 0.5, 1.5}) {
    const auto x = gp_sample(g0, 1.0, 3000, 5);
    const auto fit = fit_gp_excesses(x);
    ASSERT_TRUE(fit.converged) << g0;
    // Central differences of the public log-likelihood in (gamma, log sigma).
    const double h = 1e-5;
    const double ls = std::log(fit.scale_hat);
    const double dg = (gp_loglik(fit.gamma_hat + h, fit.scale_hat, x) - gp_loglik(fit.gamma_hat - h, fit.scale_hat, x)) / (2 * h);
    const double ds = (gp_loglik(fit.gamma_hat, std::exp(ls + h), x) - gp_loglik(fit.gamma_hat, std::exp(ls - h), x)) / (2 * h);
    EXPECT_NEAR(dg / 3000.0, 0.0, 1e-6) << g0;
    EXPECT_NEAR(ds / 3000.0, 0.0, 1e-6) << g0;
    EXPECT_NEAR(fit.loglik, gp_loglik(fit.gamma_hat, fit.scale_hat, x), 1e-8 * std::abs(fit.loglik));
  }
}

TEST(FitGp, DegenerateExcessesNeverSilentlySucceed) {
  const std::vector<double> x(50, 1.0);
  EXPECT_THROW(fit_gp_excesses(x), ConvergenceError);
  GpFitOptions quiet;
  quiet.throw_on_failure = false;
  EXPECT_FALSE(fit_gp_excesses(x, quiet).converged);
}

TEST(FitGp, TooFewExcesses) {
  const std::vector<double> x(9, 1.0);
  EXPECT_THROW(fit_gp_excesses(x), InsufficientDataError);
  EXPECT_THROW(fit_gp_pml(testing::lcg_panel(100, 2, 1), IntermediateK{9}), InsufficientDataError);
}

TEST(FitGp, ScaleEquivariance) {
  const auto x = gp_sample(0.2, 1.0, 2000, 9);
  std::vector<double> y(x);
  for (auto& v : y) v *= 3.7;
  const auto a = fit_gp_excesses(x);
  const auto b = fit_gp_excesses(y);
  EXPECT_NEAR(a.gamma_hat, b.gamma_hat, 1e-9);
  EXPECT_NEAR(b.scale_hat / a.scale_hat, 3.7, 1e-9);
}

TEST(ThresholdExcesses, DropsTiesWithTheThreshold) {
  const auto pooled = pool(PanelSample::from_rows({{1, 2}, {2, 3}, {5, 2}}));
  std::size_t ties = 0;
  const auto x = threshold_excesses(pooled, IntermediateK{3}, &ties);
  // Threshold X_{3:6} = 2; top three are 5, 3, 2.
  EXPECT_EQ(x, (std::vector<double>{3.0, 1.0}));
  EXPECT_EQ(ties, 1u);
}

TEST(GammaPath, SingletonMatchesDirectFit) {
  const auto panel = testing::pareto_panel(400, 2, 31, 0.3);
  const std::vector<std::size_t> ks{100};
  const auto rows = gamma_path(panel, ks, false);
  ASSERT_TRUE(rows[0].ok) << rows[0].error;
  const auto fit = fit_gp_pml(panel, IntermediateK{100});
  EXPECT_EQ(rows[0].gamma_hat, fit.gamma_hat);
  EXPECT_EQ(rows[0].scale_hat, fit.scale_hat);
}

TEST(GammaPath, FailuresAreRecorded) {
  const auto panel = testing::pareto_panel(40, 2, 3, 0.3);
  const std::vector<std::size_t> ks{5, 30};
  const auto rows = gamma_path(panel, ks, false);
  EXPECT_FALSE(rows[0].ok);
  EXPECT_TRUE(rows[1].ok) << rows[1].error;
}

}  // namespace
}  // namespace scedex
