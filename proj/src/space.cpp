#include "mklab/space.hpp"

#include <cmath>
#include <stdexcept>

#include "mklab/heisenberg.hpp"

namespace mklab {

namespace {

[[noreturn]] void mismatch(const char* space, const Point& p) {
  throw std::invalid_argument(std::string("distance: point ") + point_repr(p) +
                              " does not belong to space " + space);
}

double euclidean_distance(const EuclideanSpace& s, const Point& pa, const Point& pb) {
  const auto* a = std::get_if<EuclideanPoint>(&pa);
  const auto* b = std::get_if<EuclideanPoint>(&pb);
  if (!a || static_cast<int>(a->coords.size()) != s.dim) mismatch("euclidean", pa);
  if (!b || static_cast<int>(b->coords.size()) != s.dim) mismatch("euclidean", pb);
  double sum = 0.0;
  for (int i = 0; i < s.dim; ++i) {
    double d = a->coords[i] - b->coords[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double seq_distance(const Point& pa, const Point& pb) {
  const auto* a = std::get_if<SeqPoint>(&pa);
  const auto* b = std::get_if<SeqPoint>(&pb);
  if (!a || a->symbols.empty()) mismatch("ultrametric_seq", pa);
  if (!b || b->symbols.empty()) mismatch("ultrametric_seq", pb);
  const std::string& x = a->symbols;
  const std::string& y = b->symbols;
  std::size_t common = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (x[i] != y[i]) return std::ldexp(1.0, -static_cast<int>(i + 1));
  }
  if (x.size() == y.size()) return 0.0;
  return std::ldexp(1.0, -static_cast<int>(common + 1));
}

double nested_distance(const NestedBallSpace& s, const Point& pa, const Point& pb) {
  const auto* a = std::get_if<NestedPoint>(&pa);
  const auto* b = std::get_if<NestedPoint>(&pb);
  if (!a || a->index < 0) mismatch("nested_ball", pa);
  if (!b || b->index < 0) mismatch("nested_ball", pb);
  if (a->index == b->index) return 0.0;
  if (a->index == 0) return s.radius(b->index);
  if (b->index == 0) return s.radius(a->index);
  return std::max(s.radius(a->index), s.radius(b->index));
}

double heisenberg_distance(const Point& pa, const Point& pb) {
  const auto* a = std::get_if<HeisPoint>(&pa);
  const auto* b = std::get_if<HeisPoint>(&pb);
  if (!a) mismatch("heisenberg", pa);
  if (!b) mismatch("heisenberg", pb);
  return heis_distance(*a, *b);
}

}  // namespace

double NestedBallSpace::radius(std::int64_t n) const {
  if (ratio == 0.5) {
    // Exact dyadic value; ldexp clamps to 0 past the subnormal range.
    if (n > 1074) return 0.0;
    return std::ldexp(1.0, -static_cast<int>(n));
  }
  return std::pow(ratio, static_cast<double>(n));
}

double distance(const Space& s, const Point& p, const Point& q) {
  return std::visit(
      [&](const auto& sp) -> double {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, EuclideanSpace>) {
          return euclidean_distance(sp, p, q);
        } else if constexpr (std::is_same_v<T, UltrametricSeqSpace>) {
          return seq_distance(p, q);
        } else if constexpr (std::is_same_v<T, NestedBallSpace>) {
          return nested_distance(sp, p, q);
        } else {
          return heisenberg_distance(p, q);
        }
      },
      s);
}

std::string space_name(const Space& s) {
  return std::visit(
      [](const auto& sp) -> std::string {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, EuclideanSpace>) {
          return "euclidean(" + std::to_string(sp.dim) + ")";
        } else if constexpr (std::is_same_v<T, UltrametricSeqSpace>) {
          return "ultrametric_seq";
        } else if constexpr (std::is_same_v<T, NestedBallSpace>) {
          return "nested_ball";
        } else {
          return "heisenberg";
        }
      },
      s);
}

}  // namespace mklab
