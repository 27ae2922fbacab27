#pragma once

#include <cstdint>

#include "mklab/model.hpp"

namespace mklab {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// r_alpha(x) = inf{r > 0 : mu(B(x,r)) >= alpha} for the open ball.  Exact via
// closed forms or atom scans where the model supports them, bisection on the
// ball oracle otherwise (absolute tolerance 1e-6 on r).  Requires alpha in
// (0, 1].  Because the open-ball mass is left-continuous in r, on atomic
// models the infimum equals the smallest distance value whose *closed* ball
// reaches mass alpha; mu(B(x, r_alpha(x))) <= alpha always.
double r_alpha(const ProbabilityModel& model, const Point& x, double alpha);

// mu x lambda of B(x,z,r,b) = B(x,r) x I  u  S(x,r) x N(z,b), with the band
// N(z,b) clipped to [0,1].
MeasureValue extended_ball_measure(const ProbabilityModel& model, const Point& x,
                                   double z, double r, double b);

// Intermediate quantities of b_alpha at radius r_alpha(x).
struct BAlphaParts {
  double r = 0.0;         // r_alpha(x)
  double mu_open = 0.0;   // mu(B(x, r))
  double mu_sphere = 0.0; // mu(S(x, r))
  double b_half = 0.0;    // b_alpha(x, 1/2)
};
BAlphaParts b_alpha_parts(const ProbabilityModel& model, const Point& x, double alpha);

// Boundary adjustment taking b_alpha(x, 1/2) to b_alpha(x, z).
double b_alpha_adjust(double b_half, double z);

// b_alpha(x,z) = inf{b > 0 : mu x lambda(B(x,z,r_alpha(x),b)) >= alpha},
// via the piecewise closed form.  Requires alpha in (0,1), z in [0,1].
double b_alpha(const ProbabilityModel& model, const Point& x, double z, double alpha);

// Lebesgue measure of {w in [0,1] : |z - w| <= b_alpha(y, w)} given
// b_half = b_alpha(y, 1/2); the fiber of the D-set over an atom on the tie
// sphere.
double fiber_length(double z, double b_half);

// Monte-Carlo estimate of (mu x lambda)(D(x,z,alpha)), where
//   D(x,z,alpha) = {(y,w) : d(x,y) < r_alpha(y), or
//                   d(x,y) = r_alpha(y) and |z-w| <= b_alpha(y,w)}.
// r_alpha/b_alpha values are memoized per distinct sampled point.
Estimate D_measure_estimate(const ProbabilityModel& model, const Point& x, double z,
                            double alpha, int sample_count, std::uint64_t seed,
                            int threads = 1);

// Exact value of (mu x lambda)(D(x,z,alpha)) on the nested-ball model, by
// atom enumeration up to max(floor(1/alpha), index of x) and a closed-form
// tail.
double nested_D_exact(const NestedBallModel& model, const Point& x, double z,
                      double alpha);

// Example 4.4 lower bound for (mu x lambda)(D(x_0, 0, 3 alpha)):
//   exact_sum = alpha * sum_{n = ceil(alpha^-1/2)}^{floor(1/alpha) - 1} 1/n,
// together with the analytic minorant -(2/15) alpha ln alpha.
struct NestedDLowerBound {
  double exact_sum = 0.0;
  double minorant = 0.0;
  std::int64_t n_lo = 0;
  std::int64_t n_hi = 0;
};
NestedDLowerBound nested_D_lower_bound(double alpha);

enum class BayesMethod { Quadrature, MonteCarlo };

// Bayes error E_mu[min(eta, 1 - eta)].  Quadrature is available for discrete
// models, the nested-ball model, the uniform cube in d <= 2 and the planar
// Gaussian mixture; Monte-Carlo works everywhere.
Estimate bayes_error(const LearningProblem& problem, BayesMethod method,
                     int mc_samples = 100000, std::uint64_t seed = 1);

}  // namespace mklab
