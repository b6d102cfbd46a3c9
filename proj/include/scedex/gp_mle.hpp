#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scedex/dependence.hpp"
#include "scedex/panel.hpp"
#include "scedex/tail_processes.hpp"

namespace scedex {

/// Below this |gamma| the GP formulas switch to their Taylor expansions.
inline constexpr double kGammaTaylorCutoff = 1e-6;
inline constexpr double kGammaLowerBound = -0.5 + 1e-6;
inline constexpr double kGammaUpperBound = 10.0;

/// Sum over excesses of -log(sigma) - (1 + 1/gamma) log(1 + gamma x / sigma);
/// the gamma = 0 member is -log(sigma) - x / sigma. Throws DomainError on a
/// support violation, naming the offending excess.
double gp_loglik(double gamma, double sigma, std::span<const double> excesses);

struct GpFit {
  double gamma_hat = 0.0;
  double scale_hat = 0.0;
  std::size_t k = 0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Euclidean norm of the score of the mean log-likelihood in (gamma, log sigma).
  double score_norm = 0.0;
  bool hessian_negative_definite = false;
  std::size_t excess_count = 0;
  std::size_t dropped_ties = 0;
};

struct GpFitOptions {
  double score_tolerance = 1e-8;
  int max_iterations = 200;
  /// When false, a failed fit is returned with converged = false instead of throwing.
  bool throw_on_failure = true;
};

/// Pseudo-MLE on positive excesses (zeros are rejected; filter them first).
GpFit fit_gp_excesses(std::span<const double> excesses, const GpFitOptions& options = {});

/// Excesses X_{N-i+1:N} - X_{N-k:N}, i = 1..k; excesses tied with the threshold
/// are dropped and counted.
std::vector<double> threshold_excesses(const PooledOrderStatistics& pooled, IntermediateK k,
                                       std::size_t* dropped_ties = nullptr);

GpFit fit_gp_pml(const PooledOrderStatistics& pooled, IntermediateK k, const GpFitOptions& options = {});
GpFit fit_gp_pml(const PanelSample& panel, IntermediateK k, const GpFitOptions& options = {});

/// Fisher information of the GP(gamma, 1) model in (gamma, sigma).
Eigen::Matrix2d fisher_info(double gamma);
/// Closed-form inverse [[(1+g)^2, -(1+g)], [-(1+g), 2(1+g)]].
Eigen::Matrix2d fisher_info_inverse(double gamma);

/// r(i, j, s, t) = sigma_{i,j}(s, t, 1, 1); only queried for i != j.
using RLookup = std::function<double(std::size_t, std::size_t, double, double)>;

struct QuadratureOptions {
  double tolerance = 1e-6;
  /// Adaptive depth for the one-dimensional hat-moment integrals.
  unsigned max_depth = 12;
  /// Panel doublings allowed for the two-dimensional cross-station rule.
  int max_refinements = 4;
};

struct SigmaGamma {
  Eigen::Matrix2d sigma;
  /// Covariance of the 2m-vector U (first block: gamma-score parts, second: scale parts).
  Eigen::MatrixXd tau;
  double quadrature_error = 0.0;
};

/// Covariance of the limiting score vector. Same-station blocks use closed
/// forms proportional to C_i(1); cross-station blocks integrate r numerically.
SigmaGamma sigma_gamma0(double gamma, std::span<const double> c1, const RLookup& r,
                        const QuadratureOptions& options = {});
/// Same quantity with r given by an empirical grid; the bilinear interpolant is
/// integrated exactly against hat-function moments of the weight functions.
SigmaGamma sigma_gamma0(double gamma, std::span<const double> c1, const TailCopulaGrid& grid,
                        const QuadratureOptions& options = {});

struct AsymptoticCov {
  Eigen::Matrix2d matrix;
  Eigen::Matrix2d fisher;
  Eigen::Matrix2d sigma;
  double quadrature_error = 0.0;
  std::size_t k = 0;

  double se_gamma() const;
  double se_scale_ratio() const;
};

AsymptoticCov mle_asymptotic_cov(const GpFit& fit, std::span<const double> c1, const RLookup& r,
                                 const QuadratureOptions& options = {});
AsymptoticCov mle_asymptotic_cov(const GpFit& fit, const PanelSample& panel,
                                 std::size_t grid_nodes = TailCopulaGrid::kDefaultNodes,
                                 const QuadratureOptions& options = {});

struct GammaPathRow {
  std::size_t k = 0;
  double gamma_hat = 0.0;
  double scale_hat = 0.0;
  double se_gamma = 0.0;
  bool ok = false;
  std::string error;
};

std::vector<GammaPathRow> gamma_path(const PanelSample& panel, std::span<const std::size_t> k_values,
                                     bool with_standard_errors = true);

}  // namespace scedex
