#pragma once

#include <iosfwd>
#include <vector>

#include "mklab/model.hpp"
#include "mklab/rng.hpp"
#include "mklab/space.hpp"

namespace mklab {

struct LabeledPoint {
  Point x;
  int y = 0;       // label in {0, 1}
  double z = 0.0;  // tie-breaking value in [0, 1]
};

// A sample is a sequence, not a set: duplicates are allowed and identity is
// positional.
using LabeledSample = std::vector<LabeledPoint>;

enum class TieBreakPolicy {
  ByIndex,        // tied points taken in sample order
  UniformRandom,  // tied points with the smallest z first (query z fixed at 0)
  Dgkl,           // tied points closest to the query's own z first
};

struct NeighborSet {
  std::vector<int> indices;  // exactly k sample positions, ascending
  double radius = 0.0;       // the k-NN radius used
};

// Smallest radius of a closed ball around x containing at least k sample
// points: the k-th smallest distance value.
double r_knn(const Space& space, const LabeledSample& sample, const Point& x, int k);

// Selects exactly k neighbors: everything strictly inside the k-NN radius,
// then tied points on the sphere in policy order.  query_z is only read by
// the Dgkl policy.
NeighborSet select_neighbors(const Space& space, const LabeledSample& sample,
                             const Point& x, int k, TieBreakPolicy policy,
                             double query_z = 0.0);

// Majority vote with the Heaviside convention: a split vote returns 1.
int predict(const Space& space, const LabeledSample& sample, const Point& x, int k,
            TieBreakPolicy policy, double query_z = 0.0);

// Mean label over the selected neighbor set.
double eta_n(const Space& space, const LabeledSample& sample, const Point& x, int k,
             TieBreakPolicy policy, double query_z = 0.0);

// (1/k) sum_i 1{d(x_i, x) < r_{k/n}(x)} y_i with the measure-theoretic radius
// r_{k/n} from the model.  Not clamped to [0, 1].
double eta_star_n(const LabeledSample& sample, const ProbabilityModel& model,
                  const Point& x, int k);

// Extended-domain version: counts (x_i, z_i) in B(x, z, r_{k/n}(x),
// b_{k/n}(x, z)).
double eta_star_extended(const LabeledSample& sample, const ProbabilityModel& model,
                         const Point& x, double z, int k);

// Draws n labelled points: x ~ mu, y ~ Bernoulli(eta(x)), z ~ U[0,1].
LabeledSample draw_sample(const LearningProblem& problem, int n, Rng& rng);

void write_sample_csv(std::ostream& os, const Space& space, const LabeledSample& sample);
LabeledSample read_sample_csv(std::istream& is, const Space& space);

}  // namespace mklab
