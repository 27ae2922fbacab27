#include "mklab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mklab {

Schedule sqrt_schedule() {
  return {"sqrt", [](std::int64_t n) {
            return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
          }};
}

Schedule log_schedule() {
  return {"log", [](std::int64_t n) {
            return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(n)))));
          }};
}

double log_binomial_coefficient(double n, int j) {
  double acc = 0.0;
  for (int t = 1; t <= j; ++t) {
    acc += std::log(n - j + t) - std::log(static_cast<double>(t));
  }
  return acc;
}

double binomial_pmf(double n, int j, double p) {
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return 0.0;  // callers never ask for the j = n corner
  double lp = log_binomial_coefficient(n, j) + j * std::log(p) + (n - j) * std::log1p(-p);
  return std::exp(lp);
}

double binomial_tail_ge(double n, double p, int k) {
  if (k <= 0) return 1.0;
  double below = 0.0;
  for (int j = 0; j < k; ++j) below += binomial_pmf(n, j, p);
  return std::clamp(1.0 - below, 0.0, 1.0);
}

double binomial_tail_ge_check(double n, double p, int k) {
  if (k <= 0) return 1.0;
  if (n <= 1e7) {
    // Term-ratio recurrence, no logs involved.
    double q = 1.0 - p;
    double pmf = std::pow(q, n);
    double below = pmf;
    for (int j = 0; j + 1 < k; ++j) {
      pmf *= (n - j) / (j + 1.0) * (p / q);
      below += pmf;
    }
    return std::clamp(1.0 - below, 0.0, 1.0);
  }
  // Poisson tail minus the Le Cam total-variation bound n p^2.
  double lambda = n * p;
  double term = std::exp(-lambda);
  double below = term;
  for (int j = 0; j + 1 < k; ++j) {
    term *= lambda / (j + 1.0);
    below += term;
  }
  return std::clamp(1.0 - below - n * p * p, 0.0, 1.0);
}

int sample_binomial(Rng& rng, double n, double p) {
  if (p <= 0.0 || n <= 0.0) return 0;
  if (p >= 1.0) return static_cast<int>(std::lround(std::min(n, 2e9)));
  double q_log = std::log1p(-p);
  double pmf = std::exp(n * q_log);
  double u = rng.uniform01();
  double lambda = n * p;
  int cap = static_cast<int>(lambda + 60.0 * std::sqrt(lambda + 1.0) + 200.0);
  double cum = pmf;
  int j = 0;
  while (u >= cum && j < cap) {
    pmf *= (n - j) / (j + 1.0) * (p / (1.0 - p));
    ++j;
    cum += pmf;
  }
  return j;
}

CounterexampleSchedule CounterexampleSchedule::build(int horizon, double eps_start) {
  if (horizon < 2) throw std::invalid_argument("counterexample schedule: horizon >= 2");
  if (horizon > 37) {
    throw std::invalid_argument(
        "counterexample schedule: horizon > 37 underflows the band edges "
        "(eps_38 < 1e-290); the checkpoint sizes grow like exp(c i^2)");
  }
  CounterexampleSchedule cs;
  cs.horizon_ = horizon;

  double eps = eps_start;
  double prev_n = 0.0;
  for (int i = 2; i <= horizon; ++i) {
    Checkpoint cp;
    cp.i = i;
    cp.k = static_cast<int>(std::ceil(std::log(static_cast<double>(i))));
    cp.delta = std::ldexp(1.0, -i);
    cp.eps = eps;
    double target = 1.0 - cp.delta / 2.0;
    // Choose n against a slightly stricter target so the independent
    // verification (which subtracts its Le Cam correction) has headroom.
    double choose_target = 1.0 - 0.45 * cp.delta;

    // Smallest n with P[Bin(n, eps) >= k] >= choose_target; integer-exact
    // while the numbers are small, real-valued bisection beyond.
    double lo = std::max(prev_n + 1.0, static_cast<double>(cp.k));
    double hi = std::max(lo, cp.k / eps);
    while (binomial_tail_ge(hi, eps, cp.k) < choose_target) {
      hi *= 2.0;
      if (hi > 1e290) throw std::runtime_error("counterexample schedule: n overflow");
    }
    if (binomial_tail_ge(lo, eps, cp.k) >= choose_target) {
      hi = lo;
    } else {
      while (hi - lo > std::max(1e-6 * hi, 1e-9)) {
        double mid = 0.5 * (lo + hi);
        if (binomial_tail_ge(mid, eps, cp.k) >= choose_target) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
    }
    cp.n = hi <= 9e15 ? std::ceil(hi) : hi;
    if (cp.n <= prev_n) cp.n = prev_n + 1.0;
    prev_n = cp.n;

    // Inner band edge: none of the first n_i values below eps_{i+1}, again
    // with probability >= target; half the exact inverse for margin.
    double eps_next = 0.5 * (-std::expm1(std::log1p(-cp.delta / 2.0) / cp.n));
    if (eps_next < 1e-290) {
      throw std::runtime_error("counterexample schedule: eps underflow");
    }

    // Independent verification of both certificates.
    double tail = binomial_tail_ge_check(cp.n, cp.eps, cp.k);
    double none_below = std::exp(cp.n * std::log1p(-eps_next));
    cp.certified = tail >= target && none_below >= target;
    cp.cert_margin = std::min(tail - target, none_below - target);
    if (!cp.certified) {
      throw std::runtime_error("counterexample schedule: certificate failed at i=" +
                               std::to_string(i));
    }

    cs.cps_.push_back(cp);
    cs.eps_.push_back(eps_next);
    eps = eps_next;
  }
  return cs;
}

Schedule CounterexampleSchedule::as_schedule() const {
  struct Step {
    double n;
    int k;
  };
  std::vector<Step> steps;
  steps.reserve(cps_.size());
  for (const Checkpoint& cp : cps_) steps.push_back({cp.n, cp.k});
  return {"prop12", [steps](std::int64_t n) {
            int k = 1;
            for (const Step& s : steps) {
              if (static_cast<double>(n) >= s.n) {
                k = s.k;
              } else {
                break;
              }
            }
            return k;
          }};
}

}  // namespace mklab
