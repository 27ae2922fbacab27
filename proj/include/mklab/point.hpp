#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mklab {

struct EuclideanPoint {
  std::vector<double> coords;
};

// Finite symbol string.  Positions are 1-based in the metric definition:
// d(x, y) = 2^-(first position where x and y differ).
struct SeqPoint {
  std::string symbols;
};

// Index 0 denotes the limit point of the nested-ball space, indices >= 1 the
// sequence members x_n.
struct NestedPoint {
  std::int64_t index = 0;
};

struct HeisPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

using Point = std::variant<EuclideanPoint, SeqPoint, NestedPoint, HeisPoint>;

bool same_point(const Point& a, const Point& b);

// Canonical key for memoization tables (exact, bit-level for reals).
std::string point_key(const Point& p);

// Human-readable rendering, used by error messages and CSV output.
std::string point_repr(const Point& p);

inline Point euclidean(std::vector<double> coords) {
  return EuclideanPoint{std::move(coords)};
}
inline Point seq(std::string symbols) { return SeqPoint{std::move(symbols)}; }
inline Point nested(std::int64_t index) { return NestedPoint{index}; }
inline Point heis(double x, double y, double z) { return HeisPoint{x, y, z}; }

}  // namespace mklab
