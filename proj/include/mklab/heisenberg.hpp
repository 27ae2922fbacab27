#pragma once

#include "mklab/point.hpp"

namespace mklab {

// Group law for the constant C = -2:
//   (x,y,z) * (x',y',z') = (x+x', y+y', z+z' - 2xy' + 2yx').
// In complex form (z,t)(z',t') = (z+z', t+t' + 2 Im(z zbar')).
HeisPoint heis_mul(const HeisPoint& p, const HeisPoint& q);

// Inverse is coordinatewise negation.
HeisPoint heis_inv(const HeisPoint& p);

// Group norm ((x^2+y^2)^2 + z^2)^(1/4).
double heis_norm(const HeisPoint& p);

// Dilation (x,y,z) -> (tx, ty, t^2 z); requires t > 0.  Scales the norm and
// the metric by t.
HeisPoint heis_dilate(const HeisPoint& p, double t);

// Left-invariant Cygan-Koranyi distance |p^-1 q|.
double heis_distance(const HeisPoint& p, const HeisPoint& q);

}  // namespace mklab
