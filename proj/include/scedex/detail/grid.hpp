#pragma once

#include <cmath>
#include <cstddef>

namespace scedex::detail {

// floor(x) for x >= 0 that tolerates products such as n * (i/n) landing a few
// ulps below an integer.
inline std::size_t guarded_floor(double x) {
  if (!(x > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12) + 1e-9));
}

}  // namespace scedex::detail
