#include "scedex/tail_processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "scedex/error.hpp"
#include "scedex/detail/grid.hpp"

namespace scedex {

namespace {
constexpr const char* kModule = "tail_processes";

void check_k(const PooledOrderStatistics& pooled, IntermediateK k) {
  if (k.value < 1 || k.value >= pooled.n_effective()) {
    throw RangeError(kModule, fmt::format("k = {} must satisfy 1 <= k < n_effective = {}", k.value,
                                          pooled.n_effective()),
                     "choose a smaller k");
  }
}
}  // namespace

double PooledOrderStatistics::order_statistic(std::size_t r) const {
  if (r == 0) return -std::numeric_limits<double>::infinity();
  if (r > sorted_values.size()) {
    throw RangeError(kModule, fmt::format("order statistic {} of {}", r, sorted_values.size()));
  }
  return sorted_values[r - 1];
}

std::size_t PooledOrderStatistics::count_above(double threshold) const {
  return static_cast<std::size_t>(sorted_values.end() -
                                  std::upper_bound(sorted_values.begin(), sorted_values.end(), threshold));
}

std::size_t PooledOrderStatistics::count_equal(double threshold) const {
  const auto [lo, hi] = std::equal_range(sorted_values.begin(), sorted_values.end(), threshold);
  return static_cast<std::size_t>(hi - lo);
}

PooledOrderStatistics pool(const PanelSample& panel) {
  if (panel.non_missing_count() == 0) throw EmptyPoolError(kModule, "panel has no observed cells");
  std::vector<CellIndex> cells;
  cells.reserve(panel.non_missing_count());
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    for (std::size_t j = 0; j < panel.stations(); ++j) {
      if (!panel.missing(i, j)) cells.push_back({i, j});
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [&](const CellIndex& a, const CellIndex& b) {
    return panel.value(a.row, a.station) < panel.value(b.row, b.station);
  });
  PooledOrderStatistics out;
  out.sorted_values.reserve(cells.size());
  for (const auto& c : cells) out.sorted_values.push_back(panel.value(c.row, c.station));
  out.provenance = std::move(cells);
  return out;
}

double global_threshold(const PooledOrderStatistics& pooled, IntermediateK k) {
  check_k(pooled, k);
  return pooled.upper(k.value);
}

std::size_t scaled_count(IntermediateK k, double s) {
  return detail::guarded_floor(static_cast<double>(k.value) * s);
}

std::vector<double> tail_count_path(const PanelSample& panel, IntermediateK k, std::size_t station,
                                    double threshold, std::span<const double> t_grid) {
  if (station >= panel.stations()) {
    throw RangeError(kModule, fmt::format("station index {} out of range (m = {})", station, panel.stations()));
  }
  const std::size_t n = panel.rows();
  std::vector<std::size_t> cumulative(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool exceed = !panel.missing(i, station) && panel.value(i, station) > threshold;
    cumulative[i + 1] = cumulative[i] + (exceed ? 1 : 0);
  }
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw RangeError(kModule, fmt::format("t = {} outside [0, 1]", t));
    const std::size_t rows = std::min(n, detail::guarded_floor(static_cast<double>(n) * t));
    out.push_back(static_cast<double>(cumulative[rows]) / static_cast<double>(k.value));
  }
  return out;
}

std::vector<std::vector<double>> tail_empirical_process(const PanelSample& panel, IntermediateK k,
                                                        std::size_t station,
                                                        std::span<const double> s_grid,
                                                        std::span<const double> t_grid) {
  const auto pooled = pool(panel);
  check_k(pooled, k);
  std::vector<std::vector<double>> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    if (!(s > 0.0)) throw RangeError(kModule, fmt::format("s = {} must be positive", s));
    const std::size_t top = scaled_count(k, s);
    if (top > pooled.n_effective()) {
      throw RangeError(kModule, fmt::format("s = {} exceeds n_effective/k", s));
    }
    out.push_back(tail_count_path(panel, k, station, pooled.upper(top), t_grid));
  }
  return out;
}

std::vector<std::pair<double, double>> tail_quantile_process(const PooledOrderStatistics& pooled,
                                                             IntermediateK k,
                                                             std::span<const double> s_grid) {
  check_k(pooled, k);
  const double base = pooled.upper(k.value);
  const double s_min = 1.0 / (2.0 * static_cast<double>(k.value));
  std::vector<std::pair<double, double>> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    const std::size_t top = scaled_count(k, s);
    if (s < s_min * (1.0 - 1e-12) || top >= pooled.n_effective()) {
      throw RangeError(kModule, fmt::format("s = {} outside [1/(2k), n_effective/k)", s));
    }
    out.emplace_back(s, pooled.upper(top) - base);
  }
  return out;
}

}  // namespace scedex
