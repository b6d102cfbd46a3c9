#include "scedex/scedasis.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "scedex/detail/grid.hpp"
#include "scedex/error.hpp"

namespace scedex {

namespace {
constexpr const char* kModule = "scedasis";
}

double ScedasisCurve::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw RangeError(kModule, fmt::format("t = {} outside [0, 1]", t));
  const std::size_t upto = std::min(rows, detail::guarded_floor(static_cast<double>(rows) * t));
  const auto count = std::upper_bound(jump_rows.begin(), jump_rows.end(), upto) - jump_rows.begin();
  return static_cast<double>(count) * jump_size;
}

std::vector<double> ScedasisCurve::jump_times() const {
  std::vector<double> out;
  out.reserve(jump_rows.size());
  for (auto i : jump_rows) out.push_back(static_cast<double>(i) / static_cast<double>(rows));
  return out;
}

std::vector<double> ScedasisSet::c1_values() const {
  std::vector<double> out;
  out.reserve(curves.size());
  for (const auto& c : curves) out.push_back(c.c1);
  return out;
}

ScedasisCurve scedasis_curve(const PanelSample& panel, IntermediateK k, std::size_t station,
                             const ScedasisOptions& options) {
  return scedasis_curve(panel, pool(panel), k, station, options);
}

ScedasisCurve scedasis_curve(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                             std::size_t station, const ScedasisOptions& options) {
  if (station >= panel.stations()) {
    throw RangeError(kModule, fmt::format("station index {} out of range (m = {})", station, panel.stations()),
                     "stations are numbered from 1 on the command line");
  }
  const double threshold = global_threshold(pooled, k);
  ScedasisCurve curve;
  curve.station = station;
  curve.k = k.value;
  curve.rows = panel.rows();
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    if (!panel.missing(i, station) && panel.value(i, station) > threshold) curve.jump_rows.push_back(i + 1);
  }
  double denom = static_cast<double>(k.value);
  if (options.renormalize_ties) {
    const auto total = pooled.count_above(threshold);
    if (total > 0) denom = static_cast<double>(total);
  }
  curve.jump_size = 1.0 / denom;
  curve.c1 = static_cast<double>(curve.jump_rows.size()) / denom;
  return curve;
}

ScedasisSet scedasis_all(const PanelSample& panel, IntermediateK k, const ScedasisOptions& options) {
  return scedasis_all(panel, pool(panel), k, options);
}

ScedasisSet scedasis_all(const PanelSample& panel, const PooledOrderStatistics& pooled, IntermediateK k,
                         const ScedasisOptions& options) {
  ScedasisSet set;
  set.threshold = global_threshold(pooled, k);
  set.exceedances = pooled.count_above(set.threshold);
  set.threshold_ties = pooled.count_equal(set.threshold);
  set.renormalized = options.renormalize_ties;
  set.curves.reserve(panel.stations());
  for (std::size_t j = 0; j < panel.stations(); ++j) {
    set.curves.push_back(scedasis_curve(panel, pooled, k, j, options));
  }
  return set;
}

}  // namespace scedex
