#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scedex/panel.hpp"
#include "scedex/tail_processes.hpp"

namespace scedex {

enum class LimitLaw { kChiSquare, kKolmogorov };

struct TestResult {
  double statistic = 0.0;
  LimitLaw law = LimitLaw::kChiSquare;
  int df = 0;
  double p_value = 1.0;
  std::size_t k = 0;
  std::optional<std::size_t> station;
  /// Pooled values equal to the threshold (diagnostic; zero for continuous data).
  std::size_t threshold_ties = 0;
};

/// Condition-number ceiling for the reduced covariance in the spatial test.
inline constexpr double kMaxConditionNumber = 1e12;

/// Spatial homogeneity statistic from already computed estimates:
/// T = D' ((M S M')_{m-1})^{-1} D with D = sqrt(k) (C_j(1) - 1/m)_{j < m}.
/// `labels` name stations in singularity diagnostics (may be empty).
TestResult space_test_from_estimates(std::span<const double> c1, const Eigen::MatrixXd& sigma1, double k,
                                     const std::vector<std::string>& labels = {});

/// Tests H0: C_j(1) = 1/m for all j. Uses tie-renormalized estimates.
TestResult space_test(const PanelSample& panel, IntermediateK k);
TestResult space_test(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k);

/// KS statistic for uniformity of exceedance times: sup_t sqrt(K) |F_K(t) - t|
/// where F_K is the empirical distribution of the K exceedance days i/n.
double ks_statistic_from_jumps(std::span<const std::size_t> jump_rows, std::size_t rows);

/// Tests H0,j: C_j(t) = t C_j(1) at one station.
TestResult time_test(const PanelSample& panel, IntermediateK k, std::size_t station);
TestResult time_test(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                     std::size_t station);

/// P(sup |B(t)| > d) for a Brownian bridge B.
double kolmogorov_pvalue(double d);

/// Upper tail of the chi-square law with `df` degrees of freedom.
double chi_square_upper(double x, int df);

struct BonferroniResult {
  double corrected_level = 0.0;
  std::vector<bool> reject;
};
BonferroniResult bonferroni(std::span<const double> p_values, double alpha);

enum class TestKind { kSpace, kTime };

struct SweepRow {
  std::size_t k = 0;
  double statistic = 0.0;
  double p_value = 0.0;
  bool ok = false;
  std::string error;
};

/// Re-runs one test for each k; per-k failures are recorded, not thrown.
std::vector<SweepRow> k_sweep(const PanelSample& panel, std::span<const std::size_t> k_values, TestKind which,
                              std::size_t station = 0);

}  // namespace scedex
