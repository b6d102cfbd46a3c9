#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "scedex/panel.hpp"

namespace scedex {

/// Number of top order statistics used; 1 <= k < n_effective.
struct IntermediateK {
  std::size_t value;
  explicit IntermediateK(std::size_t k) : value(k) {}
};

struct CellIndex {
  std::size_t row;
  std::size_t station;
};

/// All non-missing observations of a panel sorted together, with provenance.
/// Sorting is stable in (row, station) order.
struct PooledOrderStatistics {
  std::vector<double> sorted_values;
  std::vector<CellIndex> provenance;

  std::size_t n_effective() const noexcept { return sorted_values.size(); }

  /// X_{r:N}, the r-th smallest value (1-based). r = 0 yields -infinity so that
  /// every observation exceeds it.
  double order_statistic(std::size_t r) const;
  /// X_{N-j:N} for j = floor(k*s) top-exceedance count `top`.
  double upper(std::size_t top) const { return order_statistic(n_effective() - top); }
  std::size_t count_above(double threshold) const;
  std::size_t count_equal(double threshold) const;
};

PooledOrderStatistics pool(const PanelSample& panel);

/// X_{N-k:N}, the (n_effective - k)-th smallest pooled value.
double global_threshold(const PooledOrderStatistics& pooled, IntermediateK k);

/// floor(k*s) with a small guard against representation error in k*s.
std::size_t scaled_count(IntermediateK k, double s);

/// Evaluates (1/k) * #{i <= floor(n t) : X_{i,j} > u} for a fixed threshold u on
/// a grid of t values. Shared by the empirical and oracle-threshold processes.
std::vector<double> tail_count_path(const PanelSample& panel, IntermediateK k, std::size_t station,
                                    double threshold, std::span<const double> t_grid);

/// Sequential tail empirical process at empirical thresholds X_{N-floor(ks):N}.
/// Result is indexed [s][t].
std::vector<std::vector<double>> tail_empirical_process(const PanelSample& panel, IntermediateK k,
                                                        std::size_t station,
                                                        std::span<const double> s_grid,
                                                        std::span<const double> t_grid);

/// Threshold-centred pooled tail quantiles X_{N-floor(ks):N} - X_{N-k:N} for
/// s in [1/(2k), n_effective/k).
std::vector<std::pair<double, double>> tail_quantile_process(const PooledOrderStatistics& pooled,
                                                             IntermediateK k,
                                                             std::span<const double> s_grid);

}  // namespace scedex
