#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mklab/knn.hpp"
#include "mklab/measure_ops.hpp"
#include "mklab/model.hpp"
#include "mklab/schedule.hpp"

namespace mklab {

// A measurable region Q with known (or estimated) mass, for conditional
// deviation statistics.
struct RegionSpec {
  std::string name;
  std::function<bool(const Point&)> contains;
  double measure = 1.0;
};

// ---- weak consistency ----------------------------------------------------

struct WeakRow {
  std::int64_t n = 0;
  int k = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double bayes = 0.0;
};

struct WeakResult {
  std::vector<WeakRow> rows;
  double bayes = 0.0;
  bool above_bayes = true;  // mean + 3 sigma >= bayes at every n
};

// For each n: mean (over trials) test error of the k-NN predictor trained on
// a fresh n-sample, evaluated through the conditional error at fresh test
// points.  Runs are seeded per (grid index, trial) and reproducible.
WeakResult weak_consistency_run(const LearningProblem& problem, const Schedule& schedule,
                                const std::vector<std::int64_t>& n_grid, int test_size,
                                int trials, TieBreakPolicy policy, std::uint64_t seed,
                                int threads);

// ---- strong consistency along one path ------------------------------------

struct StrongRow {
  std::int64_t n = 0;
  int k = 0;
  double error = 0.0;
};

// Grows a single labelled path and evaluates the current classifier on a
// logarithmic grid of n.  Exact error for finite-atom models, Monte-Carlo
// elsewhere.
std::vector<StrongRow> strong_consistency_path(const LearningProblem& problem,
                                               const Schedule& schedule,
                                               std::int64_t n_max, TieBreakPolicy policy,
                                               std::uint64_t path_seed, int test_size);

// ---- Prop 1.2 counterexample ----------------------------------------------

struct Prop12Row {
  int i = 0;
  int k = 0;
  double n = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double band_freq = 0.0;       // both certified band conditions held
  std::int64_t qualifying = 0;  // trials with bands at i and i+1
  std::int64_t disjoint = 0;    // of those, neighbor index sets disjoint
  double wrong_freq = 0.0;      // unanimous wrong vote frequency
  double wrong_prob = 0.0;      // min(p, 1-p)^k
  double partial_sum = 0.0;     // running sum of wrong_prob
};

struct Prop12Result {
  std::vector<Prop12Row> rows;
  bool all_qualifying_disjoint = true;
  bool wrong_freq_within_3sigma = true;
  double harmonic_reference = 0.0;  // e^-1 (H_horizon - H_1)
  bool partial_sum_exceeds = false;
};

// Simulates the Dirac-measure problem with uniform-random tie-breaking at the
// certified checkpoints.  Sample sizes n_i grow superexponentially, so the
// tie-breaking values are simulated hierarchically: per index block, the
// counts falling into each certified band are drawn from the exact binomial
// laws, positions within a band are uniform, and anything above the outermost
// band is reached through lazy order statistics.  This reproduces the joint
// law of everything the report depends on.
Prop12Result prop12_counterexample(double p, const CounterexampleSchedule& schedule,
                                   int horizon, int trials, std::uint64_t seed,
                                   int threads);

// ---- Lebesgue-Besicovitch differentiation diagnostic -----------------------

struct LbRow {
  double r = 0.0;
  double deviation_measure = 0.0;
  double std_error = 0.0;
};

// For each radius r: MC estimate of mu{x : |ball-average of eta at r -
// eta(x)| > epsilon}.
std::vector<LbRow> lb_differentiation_check(const LearningProblem& problem,
                                            const std::vector<double>& r_grid,
                                            double epsilon, int m_points,
                                            std::uint64_t seed);

// ---- D-measure sweep -------------------------------------------------------

struct DgklRow {
  double alpha = 0.0;
  int point_index = 0;
  double d_measure = 0.0;
  double std_error = 0.0;
  double bound_4a = 0.0;  // 4 alpha (-ln alpha + 1)
  bool has_exact = false;
  double exact_d3alpha = 0.0;  // nested model: exact (mu x lambda) D(x_0, 0, 3a)
  double exact_lower = 0.0;    // nested model: Example 4.4 harmonic lower bound
  bool violates = false;       // estimate exceeds bound_4a beyond 3 sigma
};

struct DgklResult {
  std::vector<DgklRow> rows;
  bool bound_asserted = false;  // ultrametric model: the bound is a theorem
  bool bound_ok = true;
};

DgklResult dgkl_bound_sweep(const ProbabilityModel& model,
                            const std::vector<double>& alpha_grid, int num_points,
                            int mc_samples, std::uint64_t seed, int threads);

// ---- concentration diagnostic ----------------------------------------------

struct ConcentrationRow {
  double epsilon = 0.0;
  double empirical_tail = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 4 exp(-n eps^2 mu(Q)^2 / (18 (beta+1)^2))
  bool vacuous = false;
  bool pass = true;
};

struct ConcentrationResult {
  std::vector<ConcentrationRow> rows;
  std::vector<double> statistics;  // per-trial conditional deviations
  bool all_pass = true;
};

ConcentrationResult deviation_concentration(const LearningProblem& problem,
                                            const RegionSpec& region, std::int64_t n,
                                            int k, int trials,
                                            const std::vector<double>& epsilons, int beta,
                                            std::uint64_t seed, int threads,
                                            int test_points = 400);

}  // namespace mklab
