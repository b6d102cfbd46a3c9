#include "scedex/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "scedex/dependence.hpp"
#include "scedex/error.hpp"
#include "scedex/parallel.hpp"
#include "scedex/scedasis.hpp"

namespace scedex {

namespace {
constexpr const char* kModule = "tests";

std::string label_of(const std::vector<std::string>& labels, std::size_t j) {
  return j < labels.size() ? labels[j] : fmt::format("#{}", j + 1);
}
}  // namespace

double chi_square_upper(double x, int df) {
  if (df < 1) throw DomainError(kModule, "chi-square needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

TestResult space_test_from_estimates(std::span<const double> c1, const Eigen::MatrixXd& sigma1, double k,
                                     const std::vector<std::string>& labels) {
  const auto m = static_cast<Eigen::Index>(c1.size());
  if (m < 2) throw DomainError(kModule, "the spatial test needs at least two stations");
  if (sigma1.rows() != m || sigma1.cols() != m) throw DomainError(kModule, "Sigma_1 must be m x m");
  if (!(k > 0.0)) throw DomainError(kModule, "k must be positive");

  Eigen::VectorXd d(m);
  for (Eigen::Index j = 0; j < m; ++j) d(j) = std::sqrt(k) * (c1[static_cast<std::size_t>(j)] - 1.0 / m);
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  const Eigen::MatrixXd full = centering * sigma1 * centering.transpose();
  const Eigen::MatrixXd reduced = full.topLeftCorner(m - 1, m - 1);
  const Eigen::VectorXd d_reduced = d.head(m - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    // Var(D_a - D_b) / k is sigma_aa + sigma_bb - 2 sigma_ab; zero flags duplicated tails.
    std::string culprits;
    const double scale = std::max(1e-300, sigma1.diagonal().cwiseAbs().maxCoeff());
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = a + 1; b < m; ++b) {
        const double spread = sigma1(a, a) + sigma1(b, b) - 2.0 * sigma1(a, b);
        if (spread <= 1e-9 * scale) {
          culprits += fmt::format("{}{}~{}", culprits.empty() ? "" : ", ",
                                  label_of(labels, static_cast<std::size_t>(a)),
                                  label_of(labels, static_cast<std::size_t>(b)));
        }
      }
    }
    throw SingularityError(
        kModule,
        fmt::format("reduced covariance (M S1 M')_(m-1) is singular or ill-conditioned (condition {:.3g})",
                    lo > 0.0 ? hi / lo : INFINITY) +
            (culprits.empty() ? std::string{} : fmt::format("; near-duplicate stations: {}", culprits)),
        "drop one station of each duplicated pair or increase k");
  }
  const double statistic = d_reduced.dot(reduced.ldlt().solve(d_reduced));

  TestResult r;
  r.statistic = std::max(0.0, statistic);
  r.law = LimitLaw::kChiSquare;
  r.df = static_cast<int>(m - 1);
  r.p_value = chi_square_upper(r.statistic, r.df);
  r.k = static_cast<std::size_t>(std::llround(k));
  return r;
}

TestResult space_test(const PanelSample& panel, IntermediateK k) { return space_test(panel, pool(panel), k); }

TestResult space_test(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k) {
  const ScedasisOptions opts{.renormalize_ties = true};
  const auto sced = scedasis_all(panel, pooled, k, opts);
  const auto sigma = sigma1_matrix(panel, pooled, k, opts);
  const auto c1 = sced.c1_values();
  auto r = space_test_from_estimates(c1, sigma.entries, sigma.divisor, panel.station_ids());
  r.k = k.value;
  r.threshold_ties = sced.threshold_ties;
  return r;
}

double ks_statistic_from_jumps(std::span<const std::size_t> jump_rows, std::size_t rows) {
  const std::size_t count = jump_rows.size();
  if (count == 0) throw NoExceedanceError(kModule, "no exceedances at this station");
  const double K = static_cast<double>(count);
  const double n = static_cast<double>(rows);
  double sup = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    const double t = static_cast<double>(jump_rows[r]) / n;
    const double right = static_cast<double>(r + 1) / K;
    const double left = static_cast<double>(r) / K;
    sup = std::max({sup, std::abs(right - t), std::abs(left - t)});
  }
  return std::sqrt(K) * sup;
}

TestResult time_test(const PanelSample& panel, IntermediateK k, std::size_t station) {
  return time_test(panel, pool(panel), k, station);
}

TestResult time_test(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                     std::size_t station) {
  const auto curve = scedasis_curve(panel, pooled, k, station, {.renormalize_ties = true});
  if (curve.exceedances() == 0) {
    throw NoExceedanceError(kModule,
                            fmt::format("station '{}' has no exceedances at k = {}",
                                        panel.station_ids()[station], k.value),
                            "increase k or exclude the station");
  }
  TestResult r;
  r.statistic = ks_statistic_from_jumps(curve.jump_rows, curve.rows);
  r.law = LimitLaw::kKolmogorov;
  r.df = 0;
  r.p_value = kolmogorov_pvalue(r.statistic);
  r.k = k.value;
  r.station = station;
  r.threshold_ties = pooled.count_equal(global_threshold(pooled, k));
  return r;
}

double kolmogorov_pvalue(double d) {
  if (!(d > 0.0)) return 1.0;
  double p = 0.0;
  if (d >= 0.6) {
    for (int i = 1; i < 1000; ++i) {
      const double term = std::exp(-2.0 * i * i * d * d);
      p += (i % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-12) break;
    }
  } else {
    // Same distribution through the theta-function identity; converges fast for small d.
    double cdf = 0.0;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int i = 1; i < 1000; ++i) {
      const double odd = 2.0 * i - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * d * d));
      cdf += term;
      if (term < 1e-16 * std::max(cdf, 1e-300)) break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / d * cdf;
  }
  return std::clamp(p, 0.0, 1.0);
}

BonferroniResult bonferroni(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError(kModule, "alpha must lie in (0, 1)");
  BonferroniResult out;
  out.corrected_level = p_values.empty() ? alpha : alpha / static_cast<double>(p_values.size());
  out.reject.reserve(p_values.size());
  for (double p : p_values) out.reject.push_back(p < out.corrected_level);
  return out;
}

std::vector<SweepRow> k_sweep(const PanelSample& panel, std::span<const std::size_t> k_values, TestKind which,
                              std::size_t station) {
  const auto pooled = pool(panel);
  std::vector<SweepRow> rows(k_values.size());
  parallel_for(k_values.size(), [&](std::size_t idx) {
    SweepRow& row = rows[idx];
    row.k = k_values[idx];
    try {
      const IntermediateK k{row.k};
      const auto r = which == TestKind::kSpace ? space_test(panel, pooled, k) : time_test(panel, pooled, k, station);
      row.statistic = r.statistic;
      row.p_value = r.p_value;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace scedex
