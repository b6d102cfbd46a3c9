#include "scedex/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "scedex/detail/grid.hpp"
#include "scedex/error.hpp"

namespace scedex {

namespace {
constexpr const char* kModule = "dependence";

void check_station(const PanelSample& panel, std::size_t j) {
  if (j >= panel.stations()) {
    throw RangeError(kModule, fmt::format("station index {} out of range (m = {})", j, panel.stations()));
  }
}

double threshold_for(const PooledOrderStatistics& pooled, IntermediateK k, double s) {
  const std::size_t top = scaled_count(k, s);
  if (top < 1 || top >= pooled.n_effective()) {
    throw RangeError(kModule, fmt::format("s = {} gives floor(ks) = {}, need 1 <= floor(ks) < {}", s, top,
                                          pooled.n_effective()));
  }
  return pooled.upper(top);
}

// Position of x in the increasing node list z (z[0] = 0) and the linear weight
// of the upper node.
std::pair<std::size_t, double> locate(const std::vector<double>& z, double x) {
  if (x <= 0.0) return {0, 0.0};
  if (x >= z.back()) return {z.size() - 2, 1.0};
  const auto it = std::upper_bound(z.begin(), z.end(), x);
  const auto hi = static_cast<std::size_t>(it - z.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - z[lo]) / (z[hi] - z[lo])};
}
}  // namespace

TailCopulaEstimate tail_copula_integral(const PanelSample& panel, const PooledOrderStatistics& pooled,
                                        IntermediateK k, std::size_t station1, std::size_t station2,
                                        double s1, double s2, double t) {
  check_station(panel, station1);
  check_station(panel, station2);
  if (!(t >= 0.0 && t <= 1.0)) throw RangeError(kModule, fmt::format("t = {} outside [0, 1]", t));
  const double u1 = threshold_for(pooled, k, s1);
  const double u2 = threshold_for(pooled, k, s2);
  const std::size_t upto = std::min(panel.rows(), detail::guarded_floor(static_cast<double>(panel.rows()) * t));
  std::size_t count = 0;
  for (std::size_t i = 0; i < upto; ++i) {
    if (panel.missing(i, station1) || panel.missing(i, station2)) continue;
    if (panel.value(i, station1) > u1 && panel.value(i, station2) > u2) ++count;
  }
  return {station1, station2, s1, s2, t, static_cast<double>(count) / static_cast<double>(k.value)};
}

TailCopulaEstimate tail_copula_integral(const PanelSample& panel, IntermediateK k, std::size_t station1,
                                        std::size_t station2, double s1, double s2, double t) {
  return tail_copula_integral(panel, pool(panel), k, station1, station2, s1, s2, t);
}

TailDependenceMatrix sigma1_matrix(const PanelSample& panel, const PooledOrderStatistics& pooled,
                                   IntermediateK k, const ScedasisOptions& options) {
  const double u = threshold_for(pooled, k, 1.0);
  const std::size_t m = panel.stations();
  double divisor = static_cast<double>(k.value);
  if (options.renormalize_ties) {
    const auto total = pooled.count_above(u);
    if (total > 0) divisor = static_cast<double>(total);
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<Eigen::Index> exceeding;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    exceeding.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (!panel.missing(i, j) && panel.value(i, j) > u) exceeding.push_back(static_cast<Eigen::Index>(j));
    }
    for (auto a : exceeding) {
      for (auto b : exceeding) counts(a, b) += 1.0;
    }
  }
  return {counts / divisor, k.value, divisor};
}

TailDependenceMatrix sigma1_matrix(const PanelSample& panel, IntermediateK k, const ScedasisOptions& options) {
  return sigma1_matrix(panel, pool(panel), k, options);
}

TailCopulaGrid::TailCopulaGrid(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                               std::size_t nodes)
    : stations_(panel.stations()), k_(k.value) {
  if (nodes < 2) throw RangeError(kModule, "tail copula grid needs at least two nodes");
  if (k.value < 1 || k.value >= pooled.n_effective()) {
    throw RangeError(kModule, fmt::format("k = {} must satisfy 1 <= k < n_effective", k.value));
  }
  const double kd = static_cast<double>(k.value);
  nodes_.resize(nodes);
  for (std::size_t a = 0; a < nodes; ++a) {
    nodes_[a] = std::pow(kd, static_cast<double>(a) / static_cast<double>(nodes - 1)) / kd;
  }
  nodes_.back() = 1.0;

  std::vector<double> thresholds(nodes);
  for (std::size_t a = 0; a < nodes; ++a) thresholds[a] = threshold_for(pooled, k, nodes_[a]);

  // level = first node index at which the cell exceeds; thresholds decrease in a.
  const auto G = static_cast<std::uint16_t>(nodes);
  const std::size_t n = panel.rows();
  const std::size_t m = stations_;
  std::vector<std::uint16_t> level(n * m, G);
  std::vector<std::vector<std::size_t>> rows_of(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (panel.missing(i, j)) continue;
      const double x = panel.value(i, j);
      if (!(x > thresholds.back())) continue;
      // First a with x > thresholds[a]; predicate is monotone in a.
      const auto it = std::partition_point(thresholds.begin(), thresholds.end(),
                                           [x](double u) { return !(x > u); });
      level[i * m + j] = static_cast<std::uint16_t>(it - thresholds.begin());
      rows_of[j].push_back(i);
    }
  }

  const auto dim = static_cast<Eigen::Index>(nodes + 1);
  pairs_.resize(m * (m + 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(dim, dim);
      for (std::size_t row : rows_of[i]) {
        const auto lj = level[row * m + j];
        if (lj == G) continue;
        hist(level[row * m + i] + 1, lj + 1) += 1.0;
      }
      for (Eigen::Index a = 1; a < dim; ++a) {
        for (Eigen::Index b = 1; b < dim; ++b) {
          hist(a, b) += hist(a - 1, b) + hist(a, b - 1) - hist(a - 1, b - 1);
        }
      }
      pairs_[pair_index(i, j)] = hist / kd;
    }
  }
}

std::size_t TailCopulaGrid::pair_index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row-major upper triangle including the diagonal.
  return i * stations_ - i * (i - 1) / 2 + (j - i);
}

Eigen::MatrixXd TailCopulaGrid::node_values(std::size_t i, std::size_t j) const {
  if (i >= stations_ || j >= stations_) throw RangeError(kModule, "station index out of range");
  const auto& block = pairs_[pair_index(i, j)];
  return i <= j ? block : Eigen::MatrixXd(block.transpose());
}

double TailCopulaGrid::operator()(std::size_t i, std::size_t j, double s, double t) const {
  if (i >= stations_ || j >= stations_) throw RangeError(kModule, "station index out of range");
  if (s < 0.0 || t < 0.0 || s > 1.0 + 1e-12 || t > 1.0 + 1e-12) {
    throw RangeError(kModule, fmt::format("r({}, {}) requested outside [0, 1]^2", s, t));
  }
  if (i > j) {
    std::swap(i, j);
    std::swap(s, t);
  }
  const auto& block = pairs_[pair_index(i, j)];
  std::vector<double> z(nodes_.size() + 1, 0.0);
  std::copy(nodes_.begin(), nodes_.end(), z.begin() + 1);
  const auto [a, wa] = locate(z, s);
  const auto [b, wb] = locate(z, t);
  const auto A = static_cast<Eigen::Index>(a);
  const auto B = static_cast<Eigen::Index>(b);
  return (1 - wa) * (1 - wb) * block(A, B) + wa * (1 - wb) * block(A + 1, B) + (1 - wa) * wb * block(A, B + 1) +
         wa * wb * block(A + 1, B + 1);
}

}  // namespace scedex
