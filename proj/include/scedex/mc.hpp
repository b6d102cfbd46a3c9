#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scedex/gp_mle.hpp"
#include "scedex/hypothesis.hpp"
#include "scedex/panel.hpp"

namespace scedex {

/// c(u) = intercept + slope * u on [0, 1].
struct LinearScedasis {
  double intercept = 1.0;
  double slope = 0.0;

  double operator()(double u) const { return intercept + slope * u; }
  double integral() const { return intercept + 0.5 * slope; }
};

enum class DependenceKind { kIndependent, kLogistic, kComonotone };

struct Dependence {
  DependenceKind kind = DependenceKind::kIndependent;
  /// Logistic parameter in (0, 1]; 1 is tail independence.
  double alpha = 1.0;
};

struct SimSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  double gamma = 0.0;
  /// One function per station; empty means c = 1 everywhere.
  std::vector<LinearScedasis> scedasis;
  Dependence dependence;
  std::uint64_t seed = 0;
  /// F_0 is exactly GP(gamma, 1) above its (1 - tail_level) quantile.
  double tail_level = 0.1;

  /// Validates and rescales c so that (1/m) sum_j int c(u, j) du = 1. Throws SpecError.
  void normalize();
  double c(double u, std::size_t station) const;
  /// C_j(t) = (1/m) int_0^t c(u, j) du.
  double integrated(std::size_t station, double t) const;
  /// (1/m) sum_j int_0^1 c(u, j) du.
  double mean_integral() const;
};

/// Panel for replication `rep`. Deterministic in (spec, rep); replications use
/// independent generator substreams.
PanelSample simulate_panel(SimSpec spec, std::uint64_t rep = 0);

/// F_0^{-1}(1 - p) for F_0 = GP(gamma, 1).
double gp_tail_quantile(double gamma, double p);

/// R(x, y) = x + y - (x^(1/alpha) + y^(1/alpha))^alpha.
double logistic_tail_copula(double alpha, double x, double y);

/// Tail copula of the simulated stations j1, j2 (min(x, y) on the diagonal).
double spec_tail_copula(const SimSpec& spec, std::size_t j1, std::size_t j2, double x, double y);

/// sigma_{j1,j2}(s1, s2, t1, t2) = (1/m) int_0^{t1 ^ t2} R(s1 c(u, j1), s2 c(u, j2)) du.
double spec_sigma(const SimSpec& spec, std::size_t j1, std::size_t j2, double s1, double s2, double t1,
                  double t2);

/// r_{ij}(s, t) = spec_sigma(i, j, s, t, 1, 1) as a lookup for the sandwich.
RLookup spec_r_lookup(SimSpec spec);

struct McReport {
  std::size_t replications = 0;
  std::size_t skipped = 0;
  double rejection_rate = 0.0;
  /// sqrt(p (1 - p) / used replications).
  double monte_carlo_se = 0.0;
  /// True when fewer than two replications were used.
  bool degenerate = false;
  std::vector<std::string> errors;

  std::size_t used() const noexcept { return replications - skipped; }
};

/// Rejection rate at `level` of the spatial test, or of the temporal test at
/// `station`. Replications whose estimator throws are skipped and counted.
McReport mc_test_size(const SimSpec& spec, IntermediateK k, TestKind which, std::size_t reps,
                      std::size_t station = 0, double level = 0.05);

struct CovarianceQuery {
  std::size_t station1 = 0;
  std::size_t station2 = 0;
  double s1 = 1.0;
  double s2 = 1.0;
  double t = 1.0;
};

struct CovarianceEntry {
  CovarianceQuery query;
  double analytic = 0.0;
  double empirical = 0.0;
  double monte_carlo_se = 0.0;

  double z() const { return monte_carlo_se > 0.0 ? (empirical - analytic) / monte_carlo_se : 0.0; }
  bool within(double bands) const { return std::abs(empirical - analytic) <= bands * monte_carlo_se; }
};

struct CovarianceReport {
  std::size_t replications = 0;
  std::size_t skipped = 0;
  /// Process at the true thresholds F_0^{-1}(1 - s k / N), centred by its mean.
  std::vector<CovarianceEntry> oracle;
  /// sqrt(k)(C_hat_j(t) - C_j(t)) at the pooled empirical threshold; filled for s1 = s2 = 1 only.
  std::vector<CovarianceEntry> self_normalized;
};

CovarianceReport mc_covariance_check(const SimSpec& spec, IntermediateK k,
                                     const std::vector<CovarianceQuery>& queries, std::size_t reps);

struct MleVarianceReport {
  std::size_t replications = 0;
  std::size_t skipped = 0;
  double mean_gamma = 0.0;
  double bias_gamma = 0.0;
  /// k Var(gamma_hat) and k Var(scale_hat / a0 - 1) with a0 = (N / k)^gamma.
  double k_var_gamma = 0.0;
  double k_var_scale = 0.0;
  double k_cov = 0.0;
  Eigen::Matrix2d predicted = Eigen::Matrix2d::Zero();
  std::vector<std::string> errors;
};

MleVarianceReport mc_mle_variance(const SimSpec& spec, IntermediateK k, std::size_t reps);

}  // namespace scedex
