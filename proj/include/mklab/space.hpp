#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "mklab/point.hpp"

namespace mklab {

struct EuclideanSpace {
  int dim = 1;
};

// Symbol strings with d(x,y) = 2^-(first differing 1-based position).
// If one string is a proper prefix of the other, the first differing position
// is len(prefix) + 1.
struct UltrametricSeqSpace {};

// Countable set {x_0} u {x_n : n >= 1} with radii r_n = ratio^n and
//   d(x_n, x_m) = max{r_n, r_m}  (n != m, n,m >= 1),
//   d(x_0, x_n) = r_n.
// With ratio = 1/2 every radius is an exact dyadic double, so the strong
// triangle inequality holds with no rounding.  Indices above ~1060 underflow
// the double format for ratio 1/2; callers should stay well below that.
struct NestedBallSpace {
  double ratio = 0.5;
  double radius(std::int64_t n) const;
};

struct HeisenbergSpace {};

using Space =
    std::variant<EuclideanSpace, UltrametricSeqSpace, NestedBallSpace, HeisenbergSpace>;

// Exact metric of the space; throws std::invalid_argument when the point
// variant does not belong to the space.
double distance(const Space& s, const Point& p, const Point& q);

std::string space_name(const Space& s);

}  // namespace mklab
