#pragma once

#include <optional>
#include <vector>

#include "mklab/space.hpp"

namespace mklab {

// Convention for radius 0: the open ball is empty, the closed ball is the
// singleton {center}.
//
// radius_is_center_norm marks Heisenberg balls whose true radius is exactly
// the Cygan-Koranyi norm of the center (the Koranyi-Reimann family).  Those
// containment tests have boundary margins far below double resolution, so
// they are decided by comparing d(c,p)^4 with |c|^4 in exact rational
// arithmetic; `radius` then only reports the rounded norm.
struct Ball {
  Point center;
  double radius = 0.0;
  bool closed = true;
  bool radius_is_center_norm = false;
};

struct BallFamily {
  Space space;
  std::vector<Ball> balls;
};

// Certificate that `witness_point` lies in exactly `multiplicity` balls of a
// family whose radii are all < scale.
struct DimensionWitness {
  BallFamily family;
  Point witness_point;
  int multiplicity = 0;
  double scale = 0.0;  // +infinity allowed
};

bool ball_contains(const Space& space, const Ball& ball, const Point& p);

// True iff no ball's center belongs to any other ball of the family.
bool is_disconnected_family(const BallFamily& family);

int multiplicity_at(const BallFamily& family, const Point& p);

// Equal-radius families only.  Returns a maximal disconnected subfamily,
// greedy in list order; its balls cover every center of the input family.
BallFamily greedy_disconnected_subfamily(const BallFamily& family);

struct DeGrootWitness {
  std::vector<Point> points;
  // False when the points were found by the farthest-point heuristic rather
  // than exhaustive search; the multiplicity is then only a lower bound.
  bool exhaustive = true;
};

// Searches candidates (all required to lie in the closed ball B(center, r))
// for a largest subset of points pairwise at distance > r.  Exhaustive up to
// 20 candidates, greedy beyond.  Returns nullopt when no pair exceeds r.
// A witness of size m certifies de Groot dimension >= m - 1.
std::optional<DeGrootWitness> de_groot_violation(const Space& space,
                                                 const Point& center, double r,
                                                 const std::vector<Point>& candidates);

// Validates the witness invariants and throws std::invalid_argument on
// failure.
DimensionWitness make_dimension_witness(BallFamily family, Point witness_point,
                                        double scale);

}  // namespace mklab
