#pragma once

#include <cmath>
#include <cstdint>

namespace mklab {

// floor/ceil with a small tolerance, for quantities like 1/alpha that are
// integers mathematically but carry decimal-to-binary rounding.
inline std::int64_t tol_floor(double x) {
  return static_cast<std::int64_t>(std::floor(x + 1e-9 + 1e-12 * std::fabs(x)));
}

inline std::int64_t tol_ceil(double x) {
  return static_cast<std::int64_t>(std::ceil(x - 1e-9 - 1e-12 * std::fabs(x)));
}

// sum_{n=lo}^{hi} 1/n, ascending.
inline double harmonic_range(std::int64_t lo, std::int64_t hi) {
  double s = 0.0;
  for (std::int64_t n = lo; n <= hi; ++n) s += 1.0 / static_cast<double>(n);
  return s;
}

}  // namespace mklab
