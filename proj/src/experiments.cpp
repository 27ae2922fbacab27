#include "mklab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "mklab/numeric.hpp"
#include "mklab/parallel.hpp"

namespace mklab {

namespace {

double conditional_error(const LearningProblem& problem, const Point& x, int prediction) {
  double e = problem.eta(x);
  return prediction == 1 ? 1.0 - e : e;
}

double query_z_for(TieBreakPolicy policy, Rng& rng) {
  return policy == TieBreakPolicy::Dgkl ? rng.uniform01() : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------- //
// weak consistency

WeakResult weak_consistency_run(const LearningProblem& problem, const Schedule& schedule,
                                const std::vector<std::int64_t>& n_grid, int test_size,
                                int trials, TieBreakPolicy policy, std::uint64_t seed,
                                int threads) {
  if (n_grid.empty() || test_size < 1 || trials < 1) {
    throw std::invalid_argument("weak_consistency_run: bad grid/test_size/trials");
  }
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("weak_consistency_run: n_grid must increase");
    }
  }

  double bayes;
  try {
    bayes = bayes_error(problem, BayesMethod::Quadrature).value;
  } catch (const std::invalid_argument&) {
    bayes = bayes_error(problem, BayesMethod::MonteCarlo, 200000, derive_seed(seed, 999)).value;
  }

  WeakResult out;
  out.bayes = bayes;
  const Space& space = problem.model->space();

  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::int64_t n = n_grid[gi];
    const int k = schedule.k_of_n(n);
    std::vector<double> errors(trials, 0.0);

    parallel_blocks(trials, threads, [&](int t) {
      Rng rng(derive_seed(seed, gi, static_cast<std::uint64_t>(t)));
      LabeledSample train = draw_sample(problem, static_cast<int>(n), rng);
      double acc = 0.0;
      for (int j = 0; j < test_size; ++j) {
        Point x = problem.model->sample(rng);
        double qz = query_z_for(policy, rng);
        int pred = predict(space, train, x, k, policy, qz);
        acc += conditional_error(problem, x, pred);
      }
      errors[t] = acc / test_size;
    });

    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= trials;
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    double se = trials > 1 ? std::sqrt(var / (trials - 1.0) / trials) : 0.0;

    out.rows.push_back(WeakRow{n, k, mean, se, bayes});
    if (mean + 3.0 * se < bayes) out.above_bayes = false;
  }
  return out;
}

// ---------------------------------------------------------------------- //
// strong consistency along one path

std::vector<StrongRow> strong_consistency_path(const LearningProblem& problem,
                                               const Schedule& schedule,
                                               std::int64_t n_max, TieBreakPolicy policy,
                                               std::uint64_t path_seed, int test_size) {
  if (n_max < 1) throw std::invalid_argument("strong_consistency_path: n_max >= 1");
  const Space& space = problem.model->space();

  std::vector<std::int64_t> grid;
  for (std::int64_t n = 1; n < n_max; n *= 2) grid.push_back(n);
  grid.push_back(n_max);

  Rng path_rng(derive_seed(path_seed, 0));
  LabeledSample path;
  path.reserve(n_max);

  std::vector<StrongRow> rows;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::int64_t n = grid[gi];
    while (static_cast<std::int64_t>(path.size()) < n) {
      Point x = problem.model->sample(path_rng);
      int y = path_rng.bernoulli(problem.eta(x));
      double z = path_rng.uniform01();
      path.push_back(LabeledPoint{std::move(x), y, z});
    }
    int k = std::min<int>(schedule.k_of_n(n), static_cast<int>(n));

    double err;
    if (const auto* atoms = problem.model->atoms()) {
      err = 0.0;
      Rng zrng(derive_seed(path_seed, 1000 + gi));
      for (const Atom& a : *atoms) {
        double qz = query_z_for(policy, zrng);
        err += a.mass * conditional_error(problem, a.point,
                                          predict(space, path, a.point, k, policy, qz));
      }
    } else {
      Rng eval_rng(derive_seed(path_seed, 1000 + gi));
      double acc = 0.0;
      for (int j = 0; j < test_size; ++j) {
        Point x = problem.model->sample(eval_rng);
        double qz = query_z_for(policy, eval_rng);
        acc += conditional_error(problem, x, predict(space, path, x, k, policy, qz));
      }
      err = acc / test_size;
    }
    rows.push_back(StrongRow{n, k, err});
  }
  return rows;
}

// ---------------------------------------------------------------------- //
// Prop 1.2 counterexample

namespace {

// Successive order statistics of m iid U(lower, 1) points, drawn lazily.
struct TailSampler {
  double lower;
  double remaining;
  double current;

  TailSampler(double lower_bound, double count)
      : lower(lower_bound), remaining(count), current(lower_bound) {}

  double next(Rng& rng) {
    if (remaining < 1.0) return 2.0;  // exhausted; beyond every valid z
    // min of `remaining` uniforms on (current, 1): inverse of ((1-t)/(1-c))^m.
    double u = rng.uniform01();
    while (u <= 0.0) u = rng.uniform01();
    double t = 1.0 - (1.0 - current) * std::exp(std::log(u) / remaining);
    remaining -= 1.0;
    current = std::max(current, t);
    return current;
  }
};

struct SimPoint {
  double z;
  std::int64_t id;
};

}  // namespace

Prop12Result prop12_counterexample(double p, const CounterexampleSchedule& schedule,
                                   int horizon, int trials, std::uint64_t seed,
                                   int threads) {
  if (!(p > 0.0 && p < 1.0) || p == 0.5) {
    throw std::invalid_argument("prop12: p in (0,1) \\ {1/2}");
  }
  if (horizon < 3 || horizon > schedule.horizon()) {
    throw std::invalid_argument("prop12: horizon must lie in [3, schedule horizon]");
  }
  const int wrong_label = p < 0.5 ? 1 : 0;
  const int n_cp = horizon - 1;  // checkpoints i = 2 .. horizon

  // Interval layout (descending z): for block/checkpoint index a in
  // [2, horizon], the band [eps_{a+1}, eps_a), then the residual
  // [0, eps_{horizon+1}).
  std::vector<double> eps(horizon + 2, 0.0);
  for (int i = 2; i <= horizon; ++i) eps[i] = schedule.at(i).eps;
  eps[horizon + 1] = schedule.eps_after(horizon);

  struct TrialCounts {
    std::vector<std::int64_t> band;       // band event held at checkpoint
    std::vector<std::int64_t> wrong;      // unanimous wrong vote at checkpoint
    std::vector<std::int64_t> qualify;    // bands held at i and i+1
    std::vector<std::int64_t> disjoint;   // ... and selections were disjoint
  };

  const int n_threads = std::max(1, threads);
  const int per_block = 256;
  const int n_blocks = (trials + per_block - 1) / per_block;
  std::vector<TrialCounts> partial(n_blocks);

  parallel_blocks(n_blocks, n_threads, [&](int blk) {
    TrialCounts counts;
    counts.band.assign(n_cp, 0);
    counts.wrong.assign(n_cp, 0);
    counts.qualify.assign(n_cp, 0);
    counts.disjoint.assign(n_cp, 0);

    int lo = blk * per_block;
    int hi = std::min(trials, lo + per_block);
    for (int t = lo; t < hi; ++t) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));

      // Hierarchical draw: per index block b, how many of its nu_b points
      // fall below eps_b, split multinomially across the bands.
      std::vector<SimPoint> pool;
      std::vector<TailSampler> tails;
      std::vector<std::int64_t> next_id(horizon + 1, 0);
      auto make_id = [&](int block, std::int64_t serial) {
        return static_cast<std::int64_t>(block) * (1LL << 40) + serial;
      };

      std::vector<std::vector<SimPoint>> block_points(horizon + 1);
      for (int b = 2; b <= horizon; ++b) {
        double nu = schedule.at(b).n - (b == 2 ? 0.0 : schedule.at(b - 1).n);
        int total = sample_binomial(rng, nu, eps[b]);
        // Split across bands a = b..horizon and the residual, conditionally.
        double mass_left = eps[b];
        int left = total;
        for (int a = b; a <= horizon + 1 && left > 0; ++a) {
          double len = (a <= horizon) ? eps[a] - eps[a + 1] : eps[horizon + 1];
          int c;
          if (a <= horizon) {
            c = sample_binomial(rng, static_cast<double>(left), len / mass_left);
          } else {
            c = left;
          }
          double z_lo = (a <= horizon) ? eps[a + 1] : 0.0;
          for (int m = 0; m < c; ++m) {
            double z = z_lo + len * rng.uniform01();
            block_points[b].push_back(SimPoint{z, make_id(b, next_id[b]++)});
          }
          left -= c;
          mass_left -= len;
        }
        tails.emplace_back(eps[b], nu - total);
      }

      std::unordered_map<std::int64_t, int> labels;
      auto label_of = [&](std::int64_t id) {
        auto it = labels.find(id);
        if (it != labels.end()) return it->second;
        int y = rng.bernoulli(p);
        labels.emplace(id, y);
        return y;
      };

      std::vector<bool> band(n_cp, false);
      std::vector<std::vector<std::int64_t>> selections(n_cp);
      std::vector<SimPoint> tail_heads;  // already-drawn tail order statistics

      for (int i = 2; i <= horizon; ++i) {
        for (auto& sp : block_points[i]) pool.push_back(sp);
        // Draw this block's first tail order statistic so its candidates
        // participate in selection.
        tail_heads.push_back(SimPoint{tails[i - 2].next(rng), make_id(i, (1LL << 39) + next_id[i]++)});

        const int k = schedule.at(i).k;
        std::int64_t below_inner = 0, in_band = 0;
        for (const auto& sp : pool) {
          if (sp.z < eps[i + 1]) ++below_inner;
          else if (sp.z < eps[i]) ++in_band;
        }
        band[i - 2] = below_inner == 0 && in_band >= k;

        // k smallest z among the pool and the lazy tails.
        std::vector<SimPoint> cands = pool;
        cands.insert(cands.end(), tail_heads.begin(), tail_heads.end());
        std::sort(cands.begin(), cands.end(),
                  [](const SimPoint& a, const SimPoint& b) { return a.z < b.z; });
        // Expand tails while a deeper tail value could still enter the top k.
        for (;;) {
          if (static_cast<int>(cands.size()) >= k) {
            double kth = cands[k - 1].z;
            bool grew = false;
            for (int b2 = 2; b2 <= i; ++b2) {
              TailSampler& ts = tails[b2 - 2];
              // At most k pulls per round: k fresh candidates below kth already
              // push the new kth at or below this tail's cursor, so the
              // re-sorted next round settles it without scanning dense tails.
              int pulled = 0;
              while (ts.remaining >= 1.0 && ts.current < kth && pulled < k) {
                SimPoint np{ts.next(rng), make_id(b2, (1LL << 39) + next_id[b2]++)};
                tail_heads.push_back(np);
                cands.push_back(np);
                grew = true;
                ++pulled;
                if (np.z >= kth) break;
              }
            }
            if (!grew) break;
            std::sort(cands.begin(), cands.end(),
                      [](const SimPoint& a, const SimPoint& b) { return a.z < b.z; });
          } else {
            // Not enough candidates yet; pull one more from every tail.
            bool added = false;
            for (int b2 = 2; b2 <= i; ++b2) {
              TailSampler& ts = tails[b2 - 2];
              if (ts.remaining >= 1.0) {
                SimPoint np{ts.next(rng), make_id(b2, (1LL << 39) + next_id[b2]++)};
                tail_heads.push_back(np);
                cands.push_back(np);
                added = true;
              }
            }
            if (!added) break;  // all tails exhausted (cannot happen at scale)
            std::sort(cands.begin(), cands.end(),
                      [](const SimPoint& a, const SimPoint& b) { return a.z < b.z; });
          }
        }

        auto& sel = selections[i - 2];
        int ones = 0;
        for (int j = 0; j < k; ++j) {
          sel.push_back(cands[j].id);
          ones += label_of(cands[j].id);
        }
        bool unanimous_wrong =
            (wrong_label == 1) ? ones == k : ones == 0;
        if (unanimous_wrong) ++counts.wrong[i - 2];
        if (band[i - 2]) ++counts.band[i - 2];
      }

      for (int i = 2; i < horizon; ++i) {
        if (!band[i - 2] || !band[i - 1]) continue;
        ++counts.qualify[i - 2];
        const auto& a = selections[i - 2];
        const auto& b = selections[i - 1];
        bool overlap = false;
        for (std::int64_t ida : a) {
          for (std::int64_t idb : b) {
            if (ida == idb) {
              overlap = true;
              break;
            }
          }
          if (overlap) break;
        }
        if (!overlap) ++counts.disjoint[i - 2];
      }
    }
    partial[blk] = std::move(counts);
  });

  TrialCounts total;
  total.band.assign(n_cp, 0);
  total.wrong.assign(n_cp, 0);
  total.qualify.assign(n_cp, 0);
  total.disjoint.assign(n_cp, 0);
  for (const auto& c : partial) {
    for (int j = 0; j < n_cp; ++j) {
      total.band[j] += c.band[j];
      total.wrong[j] += c.wrong[j];
      total.qualify[j] += c.qualify[j];
      total.disjoint[j] += c.disjoint[j];
    }
  }

  Prop12Result out;
  double partial_sum = 0.0;
  double q = std::min(p, 1.0 - p);
  for (int i = 2; i <= horizon; ++i) {
    const Checkpoint& cp = schedule.at(i);
    Prop12Row row;
    row.i = i;
    row.k = cp.k;
    row.n = cp.n;
    row.eps = cp.eps;
    row.delta = cp.delta;
    row.band_freq = static_cast<double>(total.band[i - 2]) / trials;
    row.qualifying = total.qualify[i - 2];
    row.disjoint = total.disjoint[i - 2];
    row.wrong_freq = static_cast<double>(total.wrong[i - 2]) / trials;
    row.wrong_prob = std::pow(q, cp.k);
    partial_sum += row.wrong_prob;
    row.partial_sum = partial_sum;
    out.rows.push_back(row);

    double sigma = std::sqrt(row.wrong_prob * (1.0 - row.wrong_prob) / trials);
    if (std::fabs(row.wrong_freq - row.wrong_prob) > 3.0 * sigma + 1e-12) {
      out.wrong_freq_within_3sigma = false;
    }
    if (row.qualifying != row.disjoint) out.all_qualifying_disjoint = false;
  }
  out.harmonic_reference = harmonic_range(2, horizon) * std::exp(-1.0);
  out.partial_sum_exceeds = partial_sum > out.harmonic_reference;
  return out;
}

// ---------------------------------------------------------------------- //
// Lebesgue-Besicovitch diagnostic

namespace {

double ball_average_eta(const LearningProblem& problem, const Point& x, double r,
                        Rng& rng) {
  const ProbabilityModel& model = *problem.model;
  double mass = model.ball_measure(x, r, false).value;
  if (mass <= 0.0) return problem.eta(x);  // degenerate ball: no deviation signal
  if (auto integral = model.ball_integral(x, r, problem.eta)) {
    return *integral / mass;
  }
  // Rejection sampling from the conditional law.
  const int want = 512;
  int got = 0;
  double acc = 0.0;
  for (int tries = 0; tries < 400000 && got < want; ++tries) {
    Point y = model.sample(rng);
    if (distance(model.space(), x, y) < r) {
      acc += problem.eta(y);
      ++got;
    }
  }
  if (got == 0) return problem.eta(x);
  return acc / got;
}

}  // namespace

std::vector<LbRow> lb_differentiation_check(const LearningProblem& problem,
                                            const std::vector<double>& r_grid,
                                            double epsilon, int m_points,
                                            std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lb_check: epsilon > 0");
  std::vector<LbRow> rows;
  for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
    double r = r_grid[gi];
    Rng rng(derive_seed(seed, gi));
    int deviated = 0;
    for (int j = 0; j < m_points; ++j) {
      Point x = problem.model->sample(rng);
      double avg = ball_average_eta(problem, x, r, rng);
      if (std::fabs(avg - problem.eta(x)) > epsilon) ++deviated;
    }
    double frac = static_cast<double>(deviated) / m_points;
    rows.push_back(LbRow{
        r, frac, std::sqrt(std::max(frac * (1.0 - frac), 1.0 / m_points) / m_points)});
  }
  return rows;
}

// ---------------------------------------------------------------------- //
// D-measure sweep

DgklResult dgkl_bound_sweep(const ProbabilityModel& model,
                            const std::vector<double>& alpha_grid, int num_points,
                            int mc_samples, std::uint64_t seed, int threads) {
  if (alpha_grid.empty() || num_points < 1) {
    throw std::invalid_argument("dgkl_bound_sweep: empty grid or no points");
  }
  DgklResult out;
  out.bound_asserted = std::holds_alternative<UltrametricSeqSpace>(model.space()) ||
                       std::holds_alternative<NestedBallSpace>(model.space());
  const auto* nested = dynamic_cast<const NestedBallModel*>(&model);

  Rng prng(derive_seed(seed, 777));
  std::vector<std::pair<Point, double>> queries;
  for (int i = 0; i < num_points; ++i) {
    queries.emplace_back(model.sample(prng), prng.uniform01());
  }

  for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
    double alpha = alpha_grid[ai];
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("dgkl_bound_sweep: alpha in (0,1)");
    }
    double bound = 4.0 * alpha * (-std::log(alpha) + 1.0);
    bool has_exact = false;
    double exact_d3 = 0.0, exact_lower = 0.0;
    if (nested) {
      exact_d3 = nested_D_exact(*nested, Point{NestedPoint{0}}, 0.0,
                                std::min(3.0 * alpha, 0.999999));
      try {
        exact_lower = nested_D_lower_bound(alpha).exact_sum;
      } catch (const std::invalid_argument&) {
        exact_lower = std::numeric_limits<double>::quiet_NaN();  // alpha too coarse
      }
      has_exact = true;
    }
    for (int pi = 0; pi < num_points; ++pi) {
      Estimate est = D_measure_estimate(model, queries[pi].first, queries[pi].second,
                                        alpha, mc_samples,
                                        derive_seed(seed, ai, static_cast<std::uint64_t>(pi)),
                                        threads);
      DgklRow row;
      row.alpha = alpha;
      row.point_index = pi;
      row.d_measure = est.value;
      row.std_error = est.std_error;
      row.bound_4a = bound;
      row.has_exact = has_exact;
      row.exact_d3alpha = exact_d3;
      row.exact_lower = exact_lower;
      row.violates = est.value > bound + 3.0 * est.std_error;
      if (row.violates && out.bound_asserted) out.bound_ok = false;
      out.rows.push_back(row);
    }
  }
  return out;
}

// ---------------------------------------------------------------------- //
// concentration diagnostic

ConcentrationResult deviation_concentration(const LearningProblem& problem,
                                            const RegionSpec& region, std::int64_t n,
                                            int k, int trials,
                                            const std::vector<double>& epsilons, int beta,
                                            std::uint64_t seed, int threads,
                                            int test_points) {
  if (!(region.measure > 0.0)) {
    throw std::invalid_argument("deviation_concentration: mu(Q) > 0 required");
  }
  const Space& space = problem.model->space();
  ConcentrationResult out;
  out.statistics.assign(trials, 0.0);

  parallel_blocks(trials, threads, [&](int t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    LabeledSample train = draw_sample(problem, static_cast<int>(n), rng);
    double acc = 0.0;
    int got = 0;
    for (long tries = 0; tries < 200000L * test_points && got < test_points; ++tries) {
      Point x = problem.model->sample(rng);
      if (!region.contains(x)) continue;
      acc += std::fabs(problem.eta(x) -
                       eta_n(space, train, x, k, TieBreakPolicy::UniformRandom, 0.0));
      ++got;
    }
    out.statistics[t] = got > 0 ? acc / got : 0.0;
  });

  for (double eps : epsilons) {
    ConcentrationRow row;
    row.epsilon = eps;
    std::int64_t exceed = 0;
    for (double s : out.statistics) {
      if (s > eps) ++exceed;
    }
    row.empirical_tail = static_cast<double>(exceed) / trials;
    row.std_error = std::sqrt(
        std::max(row.empirical_tail * (1.0 - row.empirical_tail), 1.0 / trials) / trials);
    double expo = -static_cast<double>(n) * eps * eps * region.measure * region.measure /
                  (18.0 * (beta + 1.0) * (beta + 1.0));
    row.bound = 4.0 * std::exp(expo);
    row.vacuous = row.bound >= 1.0;
    row.pass = row.empirical_tail <= row.bound + 3.0 * row.std_error;
    if (!row.pass) out.all_pass = false;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace mklab
