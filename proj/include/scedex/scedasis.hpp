#pragma once

#include <cstddef>
#include <vector>

#include "scedex/panel.hpp"
#include "scedex/tail_processes.hpp"

namespace scedex {

/// Integrated scedasis estimate for one station: a right-continuous step
/// function on the grid {i/n}, zero at t = 0, with jumps of `jump_size` at
/// the days where the station exceeds the pooled threshold.
struct ScedasisCurve {
  std::size_t station = 0;
  std::size_t k = 0;
  std::size_t rows = 0;
  std::vector<std::size_t> jump_rows;  // 1-based day indices i
  double jump_size = 0.0;
  double c1 = 0.0;

  double operator()(double t) const;
  std::vector<double> jump_times() const;
  std::size_t exceedances() const noexcept { return jump_rows.size(); }
};

struct ScedasisOptions {
  /// Divide by the realised strict exceedance count instead of k, so the
  /// curves sum to one at t = 1 even when pooled values tie the threshold.
  bool renormalize_ties = false;
};

struct ScedasisSet {
  std::vector<ScedasisCurve> curves;
  double threshold = 0.0;
  std::size_t exceedances = 0;
  std::size_t threshold_ties = 0;
  bool renormalized = false;

  std::vector<double> c1_values() const;
};

ScedasisCurve scedasis_curve(const PanelSample& panel, IntermediateK k, std::size_t station,
                             const ScedasisOptions& options = {});
ScedasisCurve scedasis_curve(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                             std::size_t station, const ScedasisOptions& options = {});

ScedasisSet scedasis_all(const PanelSample& panel, IntermediateK k, const ScedasisOptions& options = {});
ScedasisSet scedasis_all(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                         const ScedasisOptions& options = {});

}  // namespace scedex
