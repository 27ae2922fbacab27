#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mklab/rng.hpp"

namespace mklab {

struct Schedule {
  std::string name;
  std::function<int(std::int64_t)> k_of_n;
};

Schedule sqrt_schedule();  // k = ceil(sqrt(n))
Schedule log_schedule();   // k = max(1, ceil(ln n))

// ---- binomial machinery -------------------------------------------------
//
// n is real-valued: the checkpoint sizes of the tie-breaking counterexample
// grow far beyond 2^53, so "the binomial with n trials" is evaluated through
// its analytic formulas.  All expectations stay moderate, so the summations
// involve a handful of terms.

// log C(n, j) by direct summation of log factors (j small).
double log_binomial_coefficient(double n, int j);

double binomial_pmf(double n, int j, double p);

// P[Bin(n, p) >= k].
double binomial_tail_ge(double n, double p, int k);

// Independent evaluation for certificate checking: term-ratio recurrence for
// integral n <= 1e7, Poisson approximation with the Le Cam total-variation
// correction subtracted beyond (hence a certified lower bound).
double binomial_tail_ge_check(double n, double p, int k);

// Exact inverse-CDF sample of Bin(n, p); requires n p moderate.
int sample_binomial(Rng& rng, double n, double p);

// ---- Prop 1.2 counterexample schedule ------------------------------------

struct Checkpoint {
  int i = 0;           // checkpoint label; the first certified one is i = 2
  int k = 0;           // ceil(ln i)
  double delta = 0.0;  // 2^-i
  double eps = 0.0;    // eps_i
  double n = 0.0;      // n_i (real-valued; exact integer while representable)
  bool certified = false;
  double cert_margin = 0.0;  // min slack of the two verified certificates
};

// Checkpoints n_i and band edges eps_i such that, with confidence > 1 -
// delta_i over Z_1..Z_{n_i} iid uniform: at least ceil(ln i) of them land in
// [0, eps_i) while none land in [0, eps_{i+1}).  delta_i = 2^-i; n_i is found
// by inverting the binomial tail and eps_{i+1} by inverting the zero-hit
// probability, each with a factor-2 safety margin; both certificates are then
// re-verified with the independent evaluator.  Throws when a certificate
// fails or the horizon exhausts double range (the band edges underflow past
// i = 37).
class CounterexampleSchedule {
 public:
  static CounterexampleSchedule build(int horizon, double eps_start = 0.25);

  int horizon() const { return horizon_; }
  const std::vector<Checkpoint>& checkpoints() const { return cps_; }
  const Checkpoint& at(int i) const { return cps_.at(i - 2); }
  // eps_{i+1}, the inner band edge certified at checkpoint i <= horizon.
  double eps_after(int i) const { return eps_.at(i - 2); }

  // k_n = ceil(ln i) on [n_i, n_{i+1}); 1 before the first checkpoint.
  Schedule as_schedule() const;

 private:
  std::vector<Checkpoint> cps_;  // i = 2 .. horizon
  std::vector<double> eps_;      // eps_[j] = eps_{j+3} for j = 0 .. horizon-2
  int horizon_ = 0;
};

}  // namespace mklab
