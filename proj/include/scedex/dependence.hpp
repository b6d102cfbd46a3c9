#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "scedex/panel.hpp"
#include "scedex/scedasis.hpp"
#include "scedex/tail_processes.hpp"

namespace scedex {

struct TailCopulaEstimate {
  std::size_t station1 = 0;
  std::size_t station2 = 0;
  double s1 = 1.0;
  double s2 = 1.0;
  double t = 1.0;
  double value = 0.0;
};

/// (1/k) #{i <= floor(nt) : X_{i,j1} > X_{N-floor(k s1):N} and X_{i,j2} > X_{N-floor(k s2):N}}.
TailCopulaEstimate tail_copula_integral(const PanelSample& panel, const PooledOrderStatistics& pooled,
                                        IntermediateK k, std::size_t station1, std::size_t station2,
                                        double s1, double s2, double t);
TailCopulaEstimate tail_copula_integral(const PanelSample& panel, IntermediateK k, std::size_t station1,
                                        std::size_t station2, double s1, double s2, double t);

/// Empirical Sigma_1: entries sigma_{j1,j2}(1,1,1,1). Symmetric; the diagonal
/// coincides with the scedasis estimates C_j(1).
struct TailDependenceMatrix {
  Eigen::MatrixXd entries;
  std::size_t k = 0;
  /// Divisor actually used (k, or the exceedance count when renormalized).
  double divisor = 0.0;
};

TailDependenceMatrix sigma1_matrix(const PanelSample& panel, const PooledOrderStatistics& pooled,
                                   IntermediateK k, const ScedasisOptions& options = {});
TailDependenceMatrix sigma1_matrix(const PanelSample& panel, IntermediateK k,
                                   const ScedasisOptions& options = {});

/// Empirical r_{ij}(s, t) = sigma_{i,j}(s, t, 1, 1) on a geometric grid of s and
/// t values in [1/k, 1], bilinearly interpolated (with r = 0 at s = 0 or t = 0).
class TailCopulaGrid {
 public:
  static constexpr std::size_t kDefaultNodes = 64;

  TailCopulaGrid(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                 std::size_t nodes = kDefaultNodes);

  std::size_t stations() const noexcept { return stations_; }
  /// Interior nodes (excluding the implicit node at zero), increasing, last = 1.
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// Node values r_{ij}(nodes[a], nodes[b]) as a (G+1)x(G+1) matrix including
  /// the zero row/column for the node at 0.
  Eigen::MatrixXd node_values(std::size_t i, std::size_t j) const;

  double operator()(std::size_t i, std::size_t j, double s, double t) const;

 private:
  std::size_t stations_ = 0;
  std::size_t k_ = 0;
  std::vector<double> nodes_;
  // Upper-triangular pairs (i < j), each (G+1)x(G+1), plus the diagonal blocks.
  std::vector<Eigen::MatrixXd> pairs_;

  std::size_t pair_index(std::size_t i, std::size_t j) const;
};

}  // namespace scedex
