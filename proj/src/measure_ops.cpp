#include "mklab/measure_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>

#include "mklab/numeric.hpp"
#include "mklab/parallel.hpp"

namespace mklab {

namespace {

double atoms_r_alpha(const ProbabilityModel& model, const std::vector<Atom>& atoms,
                     const Point& x, double alpha) {
  std::vector<std::pair<double, double>> by_distance;  // (distance, mass)
  by_distance.reserve(atoms.size());
  for (const Atom& a : atoms) {
    by_distance.emplace_back(distance(model.space(), x, a.point), a.mass);
  }
  std::sort(by_distance.begin(), by_distance.end());
  // inf{r : mu(B(x,r)) >= alpha} is the smallest distance value whose closed
  // ball carries mass >= alpha.
  double cum = 0.0;
  for (std::size_t i = 0; i < by_distance.size();) {
    double d = by_distance[i].first;
    while (i < by_distance.size() && by_distance[i].first == d) {
      cum += by_distance[i].second;
      ++i;
    }
    if (cum >= alpha - 1e-15) return d;
  }
  return by_distance.back().first;
}

double bisect_r_alpha(const ProbabilityModel& model, const Point& x, double alpha) {
  double hi = std::max(model.diameter_hint(), 1e-12);
  for (int grow = 0; grow < 60 && model.ball_measure(x, hi, false).value < alpha; ++grow) {
    hi *= 2.0;
  }
  double lo = 0.0;
  while (hi - lo > 1e-7) {
    double mid = 0.5 * (lo + hi);
    if (model.ball_measure(x, mid, false).value >= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double r_alpha(const ProbabilityModel& model, const Point& x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("r_alpha: alpha must lie in (0, 1]");
  }
  if (auto closed = model.r_alpha_closed_form(x, alpha)) return *closed;
  if (const auto* atoms = model.atoms()) return atoms_r_alpha(model, *atoms, x, alpha);
  return bisect_r_alpha(model, x, alpha);
}

MeasureValue extended_ball_measure(const ProbabilityModel& model, const Point& x,
                                   double z, double r, double b) {
  if (r < 0.0 || b < 0.0) {
    throw std::invalid_argument("extended_ball_measure: r, b must be >= 0");
  }
  MeasureValue open = model.ball_measure(x, r, false);
  MeasureValue closed = model.ball_measure(x, r, true);
  double sphere = std::max(0.0, closed.value - open.value);
  double band = std::max(0.0, std::min(z + b, 1.0) - std::max(z - b, 0.0));
  MeasureValue out;
  out.value = open.value + sphere * band;
  out.std_error = open.std_error + (closed.std_error + open.std_error) * band;
  out.exact = open.exact && closed.exact;
  return out;
}

BAlphaParts b_alpha_parts(const ProbabilityModel& model, const Point& x, double alpha) {
  BAlphaParts parts;
  parts.r = r_alpha(model, x, alpha);
  parts.mu_open = model.ball_measure(x, parts.r, false).value;
  double mu_closed = model.ball_measure(x, parts.r, true).value;
  parts.mu_sphere = std::max(0.0, mu_closed - parts.mu_open);
  if (parts.mu_sphere <= 0.0) {
    parts.b_half = 0.0;
  } else {
    // One expression covers the last two cases of the piecewise form: at
    // mu(closed ball) = alpha it evaluates to exactly 1/2.
    parts.b_half =
        std::clamp((alpha - parts.mu_open) / (2.0 * parts.mu_sphere), 0.0, 0.5);
  }
  return parts;
}

double b_alpha_adjust(double b_half, double z) {
  if (b_half <= z && z <= 1.0 - b_half) return b_half;
  return 2.0 * b_half - std::min(z, 1.0 - z);
}

double b_alpha(const ProbabilityModel& model, const Point& x, double z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("b_alpha: alpha must lie in (0, 1)");
  }
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("b_alpha: z must lie in [0,1]");
  return b_alpha_adjust(b_alpha_parts(model, x, alpha).b_half, z);
}

double fiber_length(double z, double b_half) {
  if (b_half <= 0.0) return 0.0;
  // w in [b_half, 1-b_half]: band width b_half around z.
  double mid = std::max(
      0.0, std::min(z + b_half, 1.0 - b_half) - std::max(z - b_half, b_half));
  // w < b_half: |z-w| <= 2 b_half - w iff z <= 2 b_half.
  double low = (z <= 2.0 * b_half) ? b_half : 0.0;
  // w > 1-b_half: symmetric.
  double high = (z >= 1.0 - 2.0 * b_half) ? b_half : 0.0;
  return std::min(1.0, low + mid + high);
}

namespace {

struct PartsCache {
  const ProbabilityModel& model;
  double alpha;
  std::unordered_map<std::string, BAlphaParts> map;

  const BAlphaParts& get(const Point& y) {
    std::string key = point_key(y);
    auto it = map.find(key);
    if (it != map.end()) return it->second;
    return map.emplace(std::move(key), b_alpha_parts(model, y, alpha)).first->second;
  }
};

}  // namespace

Estimate D_measure_estimate(const ProbabilityModel& model, const Point& x, double z,
                            double alpha, int sample_count, std::uint64_t seed,
                            int threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("D_measure_estimate: alpha must lie in (0, 1)");
  }
  const int block_size = 8192;
  const int n_blocks = (sample_count + block_size - 1) / block_size;
  std::vector<std::int64_t> hits(n_blocks, 0);

  parallel_blocks(n_blocks, threads, [&](int b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    PartsCache cache{model, alpha, {}};
    int lo = b * block_size;
    int hi = std::min(sample_count, lo + block_size);
    std::int64_t local = 0;
    for (int i = lo; i < hi; ++i) {
      Point y = model.sample(rng);
      double w = rng.uniform01();
      double d = distance(model.space(), x, y);
      const BAlphaParts& parts = cache.get(y);
      if (d < parts.r) {
        ++local;
      } else if (d == parts.r) {
        if (std::fabs(z - w) <= b_alpha_adjust(parts.b_half, w)) ++local;
      }
    }
    hits[b] = local;
  });

  std::int64_t total = 0;
  for (std::int64_t h : hits) total += h;
  double p = static_cast<double>(total) / sample_count;
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / sample_count) / sample_count)};
}

double nested_D_exact(const NestedBallModel& model, const Point& x, double z,
                      double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("nested_D_exact: alpha must lie in (0, 1)");
  }
  const auto* q = std::get_if<NestedPoint>(&x);
  if (!q) throw std::invalid_argument("nested_D_exact: x must be a NestedPoint");
  const std::int64_t qi = q->index;
  const std::int64_t m_star = std::max<std::int64_t>(tol_floor(1.0 / alpha), 1);
  const std::int64_t n_hi = std::max(m_star, qi);
  if (n_hi > 4000000) {
    throw std::invalid_argument("nested_D_exact: alpha too small for enumeration");
  }

  auto fiber_at = [&](std::int64_t n, double r) {
    double mu_open = model.ball_measure(Point{NestedPoint{n}}, r, false).value;
    double mu_closed = model.ball_measure(Point{NestedPoint{n}}, r, true).value;
    double mu_sphere = std::max(0.0, mu_closed - mu_open);
    if (mu_sphere <= 0.0) return 0.0;
    double b_half = std::clamp((alpha - mu_open) / (2.0 * mu_sphere), 0.0, 0.5);
    return fiber_length(z, b_half);
  };

  double total = 0.0;
  for (std::int64_t n = 1; n <= n_hi; ++n) {
    if (n == qi) {
      // d(x, x) = 0: full fiber when r_alpha > 0, tie at the radius-0 sphere
      // {x} otherwise.
      double r = *model.r_alpha_closed_form(x, alpha);
      if (r > 0.0) {
        total += NestedBallModel::atom_mass(n);
      } else {
        total += NestedBallModel::atom_mass(n) * fiber_at(n, 0.0);
      }
      continue;
    }
    Point y{NestedPoint{n}};
    double d = distance(model.space(), x, y);
    double r = *model.r_alpha_closed_form(y, alpha);
    if (d < r) {
      total += NestedBallModel::atom_mass(n);
    } else if (d == r) {
      total += NestedBallModel::atom_mass(n) * fiber_at(n, r);
    }
  }

  // Tail n > n_hi: every tail atom has r_alpha(x_n) = r_{m*}.
  double tail = NestedBallModel::tail_mass(n_hi + 1);
  double r_star = model.nested_space().radius(m_star);
  if (qi == 0) {
    // d(x_0, x_n) = r_n < r_{m*}: full fibers.
    total += tail;
  } else {
    double d = model.nested_space().radius(qi);  // d(x_qi, x_n), n > n_hi
    if (d < r_star) {
      total += tail;
    } else if (d == r_star) {
      total += tail * fiber_at(n_hi + 1, r_star);
    }
  }
  return total;
}

NestedDLowerBound nested_D_lower_bound(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("nested_D_lower_bound: alpha must lie in (0, 1)");
  }
  NestedDLowerBound out;
  out.n_lo = tol_ceil(std::sqrt(1.0 / alpha));
  out.n_hi = tol_floor(1.0 / alpha) - 1;
  if (out.n_lo > out.n_hi) {
    throw std::invalid_argument("nested_D_lower_bound: alpha too large for the index range");
  }
  out.exact_sum = alpha * harmonic_range(out.n_lo, out.n_hi);
  out.minorant = -(2.0 / 15.0) * alpha * std::log(alpha);
  return out;
}

namespace {

// 64-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr int kGlHalf = 32;
const double kGlNodes[kGlHalf] = {
    0.0243502926634244325, 0.0729931217877990394, 0.1214628192961205545,
    0.1696444204239928180, 0.2174236437400070841, 0.2646871622087674163,
    0.3113228719902109561, 0.3572201583376681159, 0.4022701579639916037,
    0.4463660172534640880, 0.4894031457070529575, 0.5312794640198945457,
    0.5718956462026340343, 0.6111553551723932502, 0.6489654712546573399,
    0.6852363130542332426, 0.7198818501716108268, 0.7528199072605318966,
    0.7839723589433414076, 0.8132653151227975597, 0.8406292962525803628,
    0.8659993981540928197, 0.8893154459951141059, 0.9105221370785028058,
    0.9295691721319395758, 0.9464113748584028161, 0.9610087996520537189,
    0.9733268277899109637, 0.9833362538846259569, 0.9910133714767443207,
    0.9963401167719552793, 0.9993050417357721394};
const double kGlWeights[kGlHalf] = {
    0.0486909570091397204, 0.0485754674415034269, 0.0483447622348029572,
    0.0479993885964583077, 0.0475401657148303087, 0.0469681828162100173,
    0.0462847965813144172, 0.0454916279274181445, 0.0445905581637565631,
    0.0435837245293234534, 0.0424735151236535890, 0.0412625632426235286,
    0.0399537411327203414, 0.0385501531786156291, 0.0370551285402400460,
    0.0354722132568823838, 0.0338051618371416094, 0.0320579283548515535,
    0.0302346570724024789, 0.0283396726142594832, 0.0263774697150546587,
    0.0243527025687108733, 0.0222701738083832542, 0.0201348231535302094,
    0.0179517157756973431, 0.0157260304760247193, 0.0134630478967186426,
    0.0111681394601311288, 0.0088467598263639477, 0.0065044579689783629,
    0.0041470332605624676, 0.0017832807216964329};

template <typename F>
double gl64(double a, double b, F&& f) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGlHalf; ++i) {
    acc += kGlWeights[i] * (f(mid + half * kGlNodes[i]) + f(mid - half * kGlNodes[i]));
  }
  return acc * half;
}

// Panelled rule: min(eta, 1-eta) has kinks, so a composite grid keeps the
// rate.  Dyadic panel edges make the common eta = 1/2 crossings exact.
template <typename F>
double gl64_panels(double a, double b, int panels, F&& f) {
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    double pa = a + (b - a) * i / panels;
    double pb = a + (b - a) * (i + 1) / panels;
    acc += gl64(pa, pb, f);
  }
  return acc;
}

double bayes_quadrature(const LearningProblem& problem) {
  const ProbabilityModel& model = *problem.model;
  auto risk = [&](const Point& p) {
    double e = problem.eta(p);
    return std::min(e, 1.0 - e);
  };

  if (const auto* atoms = model.atoms()) {
    double total = 0.0;
    for (const Atom& a : *atoms) total += a.mass * risk(a.point);
    return total;
  }
  if (const auto* nested = dynamic_cast<const NestedBallModel*>(&model)) {
    (void)nested;
    double total = 0.0;
    const std::int64_t cap = 1000000;  // dropped tail mass 1/(cap+1)
    for (std::int64_t n = 1; n <= cap; ++n) {
      total += NestedBallModel::atom_mass(n) * risk(Point{NestedPoint{n}});
    }
    return total;
  }
  if (const auto* cube = dynamic_cast<const UniformCubeModel*>(&model)) {
    const auto& sp = std::get<EuclideanSpace>(cube->space());
    if (sp.dim == 1) {
      return gl64_panels(0.0, 1.0, 16,
                         [&](double x) { return risk(Point{EuclideanPoint{{x}}}); });
    }
    if (sp.dim == 2) {
      return gl64_panels(0.0, 1.0, 16, [&](double x) {
        return gl64_panels(0.0, 1.0, 16,
                           [&](double y) { return risk(Point{EuclideanPoint{{x, y}}}); });
      });
    }
    throw std::invalid_argument("bayes_error: no quadrature for uniform cube d > 2");
  }
  if (const auto* mix = dynamic_cast<const GaussianMixture2DModel*>(&model)) {
    double lox = std::min(mix->mean0()[0], mix->mean1()[0]) - 8.0 * mix->sigma();
    double hix = std::max(mix->mean0()[0], mix->mean1()[0]) + 8.0 * mix->sigma();
    double loy = std::min(mix->mean0()[1], mix->mean1()[1]) - 8.0 * mix->sigma();
    double hiy = std::max(mix->mean0()[1], mix->mean1()[1]) + 8.0 * mix->sigma();
    // Piecewise panels keep the min() kink from spoiling the rate.
    const int panels = 8;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
      double ax = lox + (hix - lox) * i / panels;
      double bx = lox + (hix - lox) * (i + 1) / panels;
      for (int j = 0; j < panels; ++j) {
        double ay = loy + (hiy - loy) * j / panels;
        double by = loy + (hiy - loy) * (j + 1) / panels;
        total += gl64(ax, bx, [&](double x) {
          return gl64(ay, by, [&](double y) {
            return mix->density(x, y) * risk(Point{EuclideanPoint{{x, y}}});
          });
        });
      }
    }
    return total;
  }
  throw std::invalid_argument("bayes_error: no quadrature rule for model " + model.name());
}

}  // namespace

Estimate bayes_error(const LearningProblem& problem, BayesMethod method, int mc_samples,
                     std::uint64_t seed) {
  if (method == BayesMethod::Quadrature) {
    return {bayes_quadrature(problem), 0.0};
  }
  Rng rng(seed);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < mc_samples; ++i) {
    double e = problem.eta(problem.model->sample(rng));
    double v = std::min(e, 1.0 - e);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / mc_samples;
  double var = std::max(0.0, sum2 / mc_samples - mean * mean);
  return {mean, std::sqrt(var / mc_samples)};
}

}  // namespace mklab
