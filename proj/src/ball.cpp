#include "mklab/ball.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <gmpxx.h>

namespace mklab {

namespace {

// d(c, p)^4 as an exact rational in the stored coordinates: with
// q = c^-1 p = (px-cx, py-cy, pz-cz+2 cx py - 2 cy px),
// d^4 = (qx^2 + qy^2)^2 + qt^2.
mpq_class heis_d4_exact(const HeisPoint& c, const HeisPoint& p) {
  mpq_class cx(c.x), cy(c.y), cz(c.z), px(p.x), py(p.y), pz(p.z);
  mpq_class qx = px - cx;
  mpq_class qy = py - cy;
  mpq_class qt = pz - cz + 2 * cx * py - 2 * cy * px;
  mpq_class s = qx * qx + qy * qy;
  return s * s + qt * qt;
}

mpq_class heis_norm4_exact(const HeisPoint& c) {
  mpq_class cx(c.x), cy(c.y), cz(c.z);
  mpq_class s = cx * cx + cy * cy;
  return s * s + cz * cz;
}

}  // namespace

bool ball_contains(const Space& space, const Ball& ball, const Point& p) {
  if (ball.radius_is_center_norm && std::holds_alternative<HeisenbergSpace>(space)) {
    const auto& c = std::get<HeisPoint>(ball.center);
    const auto& q = std::get<HeisPoint>(p);
    mpq_class d4 = heis_d4_exact(c, q);
    mpq_class r4 = heis_norm4_exact(c);
    return ball.closed ? d4 <= r4 : d4 < r4;
  }
  double d = distance(space, ball.center, p);
  return ball.closed ? d <= ball.radius : d < ball.radius;
}

bool is_disconnected_family(const BallFamily& family) {
  const auto& balls = family.balls;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = 0; j < balls.size(); ++j) {
      if (i == j) continue;
      if (ball_contains(family.space, balls[j], balls[i].center)) return false;
    }
  }
  return true;
}

int multiplicity_at(const BallFamily& family, const Point& p) {
  int count = 0;
  for (const Ball& b : family.balls) {
    if (ball_contains(family.space, b, p)) ++count;
  }
  return count;
}

BallFamily greedy_disconnected_subfamily(const BallFamily& family) {
  const auto& balls = family.balls;
  for (std::size_t i = 1; i < balls.size(); ++i) {
    if (balls[i].radius != balls[0].radius || balls[i].closed != balls[0].closed) {
      throw std::invalid_argument(
          "greedy_disconnected_subfamily: balls must share one radius");
    }
  }
  BallFamily out{family.space, {}};
  for (const Ball& candidate : balls) {
    bool ok = true;
    for (const Ball& chosen : out.balls) {
      if (ball_contains(family.space, chosen, candidate.center) ||
          ball_contains(family.space, candidate, chosen.center)) {
        ok = false;
        break;
      }
    }
    if (ok) out.balls.push_back(candidate);
  }
  return out;
}

namespace {

// Largest clique in the "far" graph by branch and bound over candidate order.
void max_clique(const std::vector<std::uint32_t>& adj, std::uint32_t allowed,
                int current_size, std::uint32_t current, int* best_size,
                std::uint32_t* best) {
  if (allowed == 0) {
    if (current_size > *best_size) {
      *best_size = current_size;
      *best = current;
    }
    return;
  }
  if (current_size + __builtin_popcount(allowed) <= *best_size) return;
  int v = __builtin_ctz(allowed);
  std::uint32_t bit = 1u << v;
  max_clique(adj, allowed & ~bit & adj[v], current_size + 1, current | bit,
             best_size, best);
  max_clique(adj, allowed & ~bit, current_size, current, best_size, best);
}

}  // namespace

std::optional<DeGrootWitness> de_groot_violation(const Space& space,
                                                 const Point& center, double r,
                                                 const std::vector<Point>& candidates) {
  for (const Point& c : candidates) {
    if (distance(space, center, c) > r) {
      throw std::invalid_argument(
          "de_groot_violation: candidate outside the closed ball: " + point_repr(c));
    }
  }
  const std::size_t n = candidates.size();
  if (n < 2) return std::nullopt;

  bool any_far = false;
  for (std::size_t i = 0; i < n && !any_far; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(space, candidates[i], candidates[j]) > r) {
        any_far = true;
        break;
      }
    }
  }
  if (!any_far) return std::nullopt;

  if (n <= 20) {
    std::vector<std::uint32_t> adj(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && distance(space, candidates[i], candidates[j]) > r) {
          adj[i] |= 1u << j;
        }
      }
    }
    int best_size = 0;
    std::uint32_t best = 0;
    max_clique(adj, (n == 32 ? ~0u : (1u << n) - 1), 0, 0, &best_size, &best);
    DeGrootWitness w;
    w.exhaustive = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (best & (1u << i)) w.points.push_back(candidates[i]);
    }
    return w;
  }

  // Farthest-point greedy: seed with the farthest pair, then add any point
  // farther than r from everything selected.
  std::size_t bi = 0, bj = 1;
  double bd = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = distance(space, candidates[i], candidates[j]);
      if (d > bd) {
        bd = d;
        bi = i;
        bj = j;
      }
    }
  }
  DeGrootWitness w;
  w.exhaustive = false;
  w.points = {candidates[bi], candidates[bj]};
  for (std::size_t i = 0; i < n; ++i) {
    if (i == bi || i == bj) continue;
    bool far = true;
    for (const Point& sel : w.points) {
      if (distance(space, candidates[i], sel) <= r) {
        far = false;
        break;
      }
    }
    if (far) w.points.push_back(candidates[i]);
  }
  return w;
}

DimensionWitness make_dimension_witness(BallFamily family, Point witness_point,
                                        double scale) {
  for (const Ball& b : family.balls) {
    if (!(b.radius < scale)) {
      throw std::invalid_argument("make_dimension_witness: radius not below scale");
    }
  }
  int mult = multiplicity_at(family, witness_point);
  if (mult < 1) {
    throw std::invalid_argument(
        "make_dimension_witness: witness point lies in no ball of the family");
  }
  return DimensionWitness{std::move(family), std::move(witness_point), mult, scale};
}

}  // namespace mklab
