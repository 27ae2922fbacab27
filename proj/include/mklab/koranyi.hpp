#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mklab/ball.hpp"

namespace mklab {

struct KoranyiEntry {
  int j = 0;
  double psi = 0.0;
  double theta = 0.0;
  std::complex<double> z;  // unit-sphere point, complex part
  double t = 0.0;          // unit-sphere point, vertical part
  HeisPoint p;             // dilated point (r z, r^2 t)
  double r = 0.0;          // ball radius = |p|_H
};

struct KoranyiReport {
  std::vector<KoranyiEntry> entries;
  // center_in_ball[i][j]: does center p_{i+1} lie in the closed ball around
  // p_{j+1}?  Disconnectedness means false everywhere off the diagonal.
  std::vector<std::vector<bool>> center_in_ball;
  std::string to_json() const;
};

struct KoranyiFamily {
  BallFamily family;
  KoranyiReport report;
};

// Sequence of disconnected closed balls around the origin of the Heisenberg
// group: unit-sphere directions
//   psi_j = pi - (pi/2)/(j+1)^2,  theta_j = (pi/2)(j-1)/j,
//   (z_j, t_j) = (e^{i theta_j} sqrt(sin psi_j), cos psi_j),
// dilated by radii r_j found by geometric shrinking (r_1 = 1, each next
// radius starts at r_{j-1} * shrink_factor and keeps shrinking until the
// dilated point escapes all previously selected closed balls).  Throws
// std::runtime_error if a radius fails to escape within 200 shrink steps.
KoranyiFamily koranyi_reimann_family(int count, double shrink_factor = 0.5);

}  // namespace mklab
