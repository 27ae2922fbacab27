#include "mklab/heisenberg.hpp"

#include <cmath>
#include <stdexcept>

namespace mklab {

HeisPoint heis_mul(const HeisPoint& p, const HeisPoint& q) {
  return HeisPoint{p.x + q.x, p.y + q.y,
                   p.z + q.z - 2.0 * p.x * q.y + 2.0 * p.y * q.x};
}

HeisPoint heis_inv(const HeisPoint& p) { return HeisPoint{-p.x, -p.y, -p.z}; }

double heis_norm(const HeisPoint& p) {
  // Scaled evaluation: the Koranyi-Reimann radii reach ~1e-81, where the
  // naive (x^2+y^2)^2 underflows.
  double m = std::max({std::fabs(p.x), std::fabs(p.y), std::sqrt(std::fabs(p.z))});
  if (m == 0.0) return 0.0;
  if (!std::isfinite(m)) return m;
  double sx = p.x / m, sy = p.y / m, sz = p.z / (m * m);
  double s = sx * sx + sy * sy;
  return m * std::pow(s * s + sz * sz, 0.25);
}

HeisPoint heis_dilate(const HeisPoint& p, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heis_dilate: t must be > 0");
  return HeisPoint{t * p.x, t * p.y, t * t * p.z};
}

double heis_distance(const HeisPoint& p, const HeisPoint& q) {
  return heis_norm(heis_mul(heis_inv(p), q));
}

}  // namespace mklab
