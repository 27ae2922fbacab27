#include "mklab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "mklab/heisenberg.hpp"
#include "mklab/numeric.hpp"

namespace mklab {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t query_seed(std::uint64_t oracle_seed, const Point& center, double r,
                         bool closed) {
  std::string key = point_key(center);
  std::uint64_t rb;
  std::memcpy(&rb, &r, sizeof rb);
  key.append(reinterpret_cast<const char*>(&rb), sizeof rb);
  key.push_back(closed ? '1' : '0');
  return derive_seed(oracle_seed, fnv1a(key));
}

MeasureValue mc_ball_measure(const ProbabilityModel& model, std::uint64_t oracle_seed,
                             const Point& center, double r, bool closed) {
  if (r < 0.0) return {0.0, 0.0, false};
  Rng rng(query_seed(oracle_seed, center, r, closed));
  const int m = model.mc_samples();
  std::int64_t hits = 0;
  for (int i = 0; i < m; ++i) {
    double d = distance(model.space(), center, model.sample(rng));
    if (closed ? d <= r : d < r) ++hits;
  }
  double p = static_cast<double>(hits) / m;
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / m) / m), false};
}

}  // namespace

// ---------------------------------------------------------------------- //
// FiniteDiscreteModel

FiniteDiscreteModel::FiniteDiscreteModel(Space space, std::vector<Atom> atoms,
                                         std::string name)
    : ProbabilityModel(std::move(space), std::move(name), 0), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("discrete model needs atoms");
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (a.mass < 0.0) throw std::invalid_argument("negative atom mass");
    total += a.mass;
    cdf_.push_back(total);
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("atom masses must sum to 1");
  }
  cdf_.back() = 1.0;
}

Point FiniteDiscreteModel::sample(Rng& rng) const {
  double u = rng.uniform01();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t idx = std::min<std::size_t>(it - cdf_.begin(), atoms_.size() - 1);
  return atoms_[idx].point;
}

MeasureValue FiniteDiscreteModel::ball_measure(const Point& center, double r,
                                               bool closed) const {
  double total = 0.0;
  for (const Atom& a : atoms_) {
    double d = distance(space_, center, a.point);
    if (closed ? d <= r : d < r) total += a.mass;
  }
  return {total, 0.0, true};
}

std::optional<double> FiniteDiscreteModel::ball_integral(
    const Point& x, double r, const std::function<double(const Point&)>& f) const {
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (distance(space_, x, a.point) < r) total += a.mass * f(a.point);
  }
  return total;
}

double FiniteDiscreteModel::diameter_hint() const {
  double best = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      best = std::max(best, distance(space_, atoms_[i].point, atoms_[j].point));
    }
  }
  return best + 1.0;
}

ModelPtr make_dirac_model(Point at) {
  Space sp;
  if (std::holds_alternative<EuclideanPoint>(at)) {
    sp = EuclideanSpace{static_cast<int>(std::get<EuclideanPoint>(at).coords.size())};
  } else if (std::holds_alternative<SeqPoint>(at)) {
    sp = UltrametricSeqSpace{};
  } else if (std::holds_alternative<NestedPoint>(at)) {
    sp = NestedBallSpace{};
  } else {
    sp = HeisenbergSpace{};
  }
  return std::make_shared<FiniteDiscreteModel>(sp, std::vector<Atom>{{std::move(at), 1.0}},
                                               "dirac");
}

// ---------------------------------------------------------------------- //
// NestedBallModel

NestedBallModel::NestedBallModel(NestedBallSpace space)
    : ProbabilityModel(space, "nested", 0), nested_(space) {}

double NestedBallModel::atom_mass(std::int64_t n) {
  if (n <= 0) return 0.0;
  return 1.0 / (static_cast<double>(n) * (static_cast<double>(n) + 1.0));
}

double NestedBallModel::tail_mass(std::int64_t from) {
  if (from <= 0) return 1.0;
  return 1.0 / static_cast<double>(from);
}

Point NestedBallModel::sample(Rng& rng) const {
  double v = 1.0 - rng.uniform01();  // (0, 1]
  double q = 1.0 / v;
  std::int64_t n = static_cast<std::int64_t>(std::ceil(q)) - 1;
  n = std::clamp<std::int64_t>(n, 1, (std::int64_t{1} << 52));
  return NestedPoint{n};
}

NestedBallModel::BallContents NestedBallModel::ball_contents(const Point& center,
                                                             double r,
                                                             bool closed) const {
  const auto* c = std::get_if<NestedPoint>(&center);
  if (!c || c->index < 0) {
    throw std::invalid_argument("nested model: center must be a NestedPoint");
  }
  auto inside = [&](double d) { return closed ? d <= r : d < r; };

  BallContents out;
  // Radius 0: the open ball is empty, the closed ball is {center}.  Handled
  // apart because radii past index ~1074 underflow to 0.0 and would otherwise
  // be mistaken for distance-0 atoms.
  if (r <= 0.0) {
    if (closed && r == 0.0) {
      if (c->index == 0) {
        out.contains_limit = true;
      } else {
        out.self_index = c->index;
      }
    }
    return out;
  }
  // Smallest index whose radius is inside the ball; radii halve, so the scan
  // is O(log 1/r) and the included indices form a tail {m : m >= first}.
  auto first_tail_index = [&](std::int64_t lo) -> std::int64_t {
    std::int64_t m = std::max<std::int64_t>(lo, 1);
    for (; m <= 1076; ++m) {
      if (inside(nested_.radius(m))) return m;
    }
    return 0;  // nothing representable inside
  };

  std::int64_t n = c->index;
  if (n == 0) {
    out.contains_limit = inside(0.0);
    out.tail_from = first_tail_index(1);
    return out;
  }

  if (inside(0.0)) out.self_index = n;
  if (inside(nested_.radius(n))) {
    out.contains_limit = true;
    // every x_m with m > n sits at distance r_n from x_n
    out.tail_from = n + 1;
  }
  std::int64_t first = first_tail_index(1);
  if (first != 0 && first < n) {
    out.range_first = first;
    out.range_last = n - 1;
  }
  return out;
}

MeasureValue NestedBallModel::ball_measure(const Point& center, double r,
                                           bool closed) const {
  if (r < 0.0) return {0.0, 0.0, true};
  BallContents bc = ball_contents(center, r, closed);
  // Telescoped sums in extended precision, rounded once: equal true masses
  // give bit-equal doubles regardless of the ball's decomposition.
  long double total = 0.0L;
  if (bc.range_last >= bc.range_first) {
    total += 1.0L / static_cast<long double>(bc.range_first) -
             1.0L / static_cast<long double>(bc.range_last + 1);
  }
  if (bc.self_index > 0) {
    total += 1.0L / static_cast<long double>(bc.self_index) -
             1.0L / static_cast<long double>(bc.self_index + 1);
  }
  if (bc.tail_from > 0) total += 1.0L / static_cast<long double>(bc.tail_from);
  return {std::min(static_cast<double>(total), 1.0), 0.0, true};
}

std::optional<double> NestedBallModel::r_alpha_closed_form(const Point& x,
                                                           double alpha) const {
  const auto* c = std::get_if<NestedPoint>(&x);
  if (!c) throw std::invalid_argument("nested model: point must be a NestedPoint");
  std::int64_t n = c->index;
  // Smallest distance value whose closed ball reaches mass alpha; this equals
  // inf{r : mu(B(x,r)) >= alpha} because the open-ball mass is left-continuous.
  std::int64_t m_star = std::max<std::int64_t>(tol_floor(1.0 / alpha), 1);
  if (n == 0) return nested_.radius(m_star);
  if (atom_mass(n) >= alpha) return 0.0;
  if (1.0 / static_cast<double>(n) >= alpha) return nested_.radius(n);
  return nested_.radius(m_star);
}

std::optional<double> NestedBallModel::ball_integral(
    const Point& x, double r, const std::function<double(const Point&)>& f) const {
  BallContents bc = ball_contents(x, r, /*closed=*/false);
  // Truncated enumeration; dropped mass is at most ~1/cap, well under the
  // tolerances of the diagnostics that integrate over balls.
  const std::int64_t cap = 100000;
  double total = 0.0;
  if (bc.range_last >= bc.range_first) {
    for (std::int64_t m = bc.range_first; m <= std::min(bc.range_last, bc.range_first + cap);
         ++m) {
      total += atom_mass(m) * f(Point{NestedPoint{m}});
    }
  }
  if (bc.self_index > 0) {
    total += atom_mass(bc.self_index) * f(Point{NestedPoint{bc.self_index}});
  }
  if (bc.tail_from > 0) {
    for (std::int64_t m = bc.tail_from; m <= bc.tail_from + cap; ++m) {
      total += atom_mass(m) * f(Point{NestedPoint{m}});
    }
  }
  return total;
}

// ---------------------------------------------------------------------- //
// CantorUniformModel

CantorUniformModel::CantorUniformModel(int depth)
    : ProbabilityModel(UltrametricSeqSpace{}, "cantor", 0), depth_(depth) {
  if (depth_ < 1 || depth_ > 4096) {
    throw std::invalid_argument("cantor model: depth out of range");
  }
}

Point CantorUniformModel::sample(Rng& rng) const {
  std::string s;
  s.reserve(depth_);
  std::uint64_t word = 0;
  int left = 0;
  for (int i = 0; i < depth_; ++i) {
    if (left == 0) {
      word = rng.bits();
      left = 64;
    }
    s.push_back((word & 1) ? '1' : '0');
    word >>= 1;
    --left;
  }
  return SeqPoint{std::move(s)};
}

MeasureValue CantorUniformModel::ball_measure(const Point& center, double r,
                                              bool closed) const {
  if (!std::holds_alternative<SeqPoint>(center)) {
    throw std::invalid_argument("cantor model: center must be a SeqPoint");
  }
  if (r <= 0.0) return {0.0, 0.0, true};  // atomless: radius-0 balls are null
  // Number of leading coordinates forced to agree with the center.
  int forced = 0;
  double v = 0.5;  // 2^-1
  while ((closed ? v > r : v >= r) && forced < 1076) {
    ++forced;
    v *= 0.5;
  }
  double mass = forced >= 1074 ? 0.0 : std::ldexp(1.0, -forced);
  return {mass, 0.0, true};
}

std::optional<double> CantorUniformModel::r_alpha_closed_form(const Point& /*x*/,
                                                              double alpha) const {
  // mu(B(x,r)) = 2^-m on r in (2^-(m+1), 2^-m]; the infimum radius reaching
  // mass alpha is 2^-(M+1) with M the largest integer where 2^-M >= alpha.
  int m_star = 0;
  double v = 1.0;
  while (v * 0.5 >= alpha && m_star < 1074) {
    v *= 0.5;
    ++m_star;
  }
  return std::ldexp(1.0, -(m_star + 1));
}

// ---------------------------------------------------------------------- //
// UniformCubeModel

UniformCubeModel::UniformCubeModel(int dim, int mc_samples, std::uint64_t oracle_seed)
    : ProbabilityModel(EuclideanSpace{dim}, "uniform_cube", mc_samples),
      dim_(dim),
      oracle_seed_(oracle_seed) {
  if (dim_ < 1) throw std::invalid_argument("uniform cube: dim >= 1");
}

Point UniformCubeModel::sample(Rng& rng) const {
  std::vector<double> c(dim_);
  for (int i = 0; i < dim_; ++i) c[i] = rng.uniform01();
  return EuclideanPoint{std::move(c)};
}

double disk_unit_square_area(double cx, double cy, double r) {
  if (r <= 0.0) return 0.0;
  // Any disk of radius >= diam([0,1]^2) around an interior-relevant center
  // covers the square; also keeps r = infinity out of the arithmetic below.
  if (r >= 4.0 + std::fabs(cx) + std::fabs(cy)) return 1.0;
  double lo = std::max(0.0, cx - r);
  double hi = std::min(1.0, cx + r);
  if (lo >= hi) return 0.0;

  // Antiderivative of sqrt(r^2 - v^2).
  auto F = [&](double v) {
    v = std::clamp(v, -r, r);
    double s = std::sqrt(std::max(0.0, r * r - v * v));
    return 0.5 * (v * s + r * r * std::asin(std::clamp(v / r, -1.0, 1.0)));
  };
  auto seg = [&](double a, double b) { return F(b - cx) - F(a - cx); };

  // Split where the chord tops/bottoms cross the square edges; on each piece
  // the integrand is c0 + c1 * sqrt(r^2 - (u-cx)^2).
  std::vector<double> cuts = {lo, hi};
  auto add_cut = [&](double q) {
    if (q > 0.0) {
      double s = std::sqrt(q);
      for (double u : {cx - s, cx + s}) {
        if (u > lo && u < hi) cuts.push_back(u);
      }
    }
  };
  add_cut(r * r - (1.0 - cy) * (1.0 - cy));  // cy + s = 1
  add_cut(r * r - cy * cy);                  // cy - s = 0
  add_cut(r * r - (0.0 - cy) * (0.0 - cy));  // cy + s = 0 (center below box)
  add_cut(r * r - (cy - 1.0) * (cy - 1.0));  // cy - s = 1 (center above box)
  std::sort(cuts.begin(), cuts.end());

  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b - a <= 0.0) continue;
    double mid = 0.5 * (a + b);
    double smid = std::sqrt(std::max(0.0, r * r - (mid - cx) * (mid - cx)));
    double top_v = std::min(cy + smid, 1.0);
    double bot_v = std::max(cy - smid, 0.0);
    if (top_v <= bot_v) continue;
    bool top_arc = cy + smid < 1.0;
    bool bot_arc = cy - smid > 0.0;
    if (top_arc && bot_arc) {
      area += 2.0 * seg(a, b);
    } else if (top_arc) {
      area += cy * (b - a) + seg(a, b);
    } else if (bot_arc) {
      area += (1.0 - cy) * (b - a) + seg(a, b);
    } else {
      area += b - a;
    }
  }
  return area;
}

MeasureValue UniformCubeModel::ball_measure(const Point& center, double r,
                                            bool closed) const {
  const auto* c = std::get_if<EuclideanPoint>(&center);
  if (!c || static_cast<int>(c->coords.size()) != dim_) {
    throw std::invalid_argument("uniform cube: bad center point");
  }
  if (r < 0.0) return {0.0, 0.0, true};
  if (dim_ == 1) {
    double x = c->coords[0];
    double v = std::max(0.0, std::min(x + r, 1.0) - std::max(x - r, 0.0));
    return {v, 0.0, true};  // open and closed agree (atomless)
  }
  if (dim_ == 2) {
    return {disk_unit_square_area(c->coords[0], c->coords[1], r), 0.0, true};
  }
  return mc_ball_measure(*this, oracle_seed_, center, r, closed);
}

std::optional<double> UniformCubeModel::r_alpha_closed_form(const Point& x,
                                                            double alpha) const {
  const auto* c = std::get_if<EuclideanPoint>(&x);
  if (!c) throw std::invalid_argument("uniform cube: bad point");
  if (dim_ == 1) {
    double p = c->coords[0];
    double near = std::min(p, 1.0 - p), far = std::max(p, 1.0 - p);
    if (alpha <= 2.0 * near) return alpha / 2.0;
    return std::min(alpha - near, far);
  }
  if (dim_ == 2) {
    double lo = 0.0, hi = std::sqrt(2.0) + 1e-9;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      if (disk_unit_square_area(c->coords[0], c->coords[1], mid) >= alpha) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
  return std::nullopt;
}

std::optional<double> UniformCubeModel::ball_integral(
    const Point& x, double r, const std::function<double(const Point&)>& f) const {
  if (dim_ != 1) return std::nullopt;
  const auto& c = std::get<EuclideanPoint>(x);
  double lo = std::max(c.coords[0] - r, 0.0);
  double hi = std::min(c.coords[0] + r, 1.0);
  if (hi <= lo) return 0.0;
  // 32-point Gauss-Legendre on [lo, hi].
  static const double nodes[16] = {
      0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
      0.3318686022821276497, 0.4213512761306353454, 0.5068999089322293900,
      0.5877157572407623290, 0.6630442669302152009, 0.7321821187402896804,
      0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
      0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
      0.9972638618494815635};
  static const double weights[16] = {
      0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
      0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
      0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
      0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
      0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
      0.0070186100094700966};
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) {
    acc += weights[i] * f(Point{EuclideanPoint{{mid + half * nodes[i]}}});
    acc += weights[i] * f(Point{EuclideanPoint{{mid - half * nodes[i]}}});
  }
  return acc * half;  // density 1 on [0,1]
}

// ---------------------------------------------------------------------- //
// GaussianMixture2DModel

GaussianMixture2DModel::GaussianMixture2DModel(std::array<double, 2> mean0,
                                               std::array<double, 2> mean1, double sigma,
                                               double weight1, int mc_samples,
                                               std::uint64_t oracle_seed)
    : ProbabilityModel(EuclideanSpace{2}, "gaussian_mixture", mc_samples),
      mean0_(mean0),
      mean1_(mean1),
      sigma_(sigma),
      weight1_(weight1),
      oracle_seed_(oracle_seed) {
  if (!(sigma_ > 0.0)) throw std::invalid_argument("mixture: sigma > 0");
  if (!(weight1_ >= 0.0 && weight1_ <= 1.0)) {
    throw std::invalid_argument("mixture: weight in [0,1]");
  }
}

Point GaussianMixture2DModel::sample(Rng& rng) const {
  const auto& m = rng.bernoulli(weight1_) ? mean1_ : mean0_;
  return EuclideanPoint{{m[0] + sigma_ * rng.normal(), m[1] + sigma_ * rng.normal()}};
}

double GaussianMixture2DModel::density(double x, double y) const {
  double inv = 1.0 / (2.0 * sigma_ * sigma_);
  double q0 = (x - mean0_[0]) * (x - mean0_[0]) + (y - mean0_[1]) * (y - mean0_[1]);
  double q1 = (x - mean1_[0]) * (x - mean1_[0]) + (y - mean1_[1]) * (y - mean1_[1]);
  double norm = 1.0 / (2.0 * M_PI * sigma_ * sigma_);
  return norm * ((1.0 - weight1_) * std::exp(-q0 * inv) + weight1_ * std::exp(-q1 * inv));
}

double GaussianMixture2DModel::posterior1(const Point& p) const {
  const auto& c = std::get<EuclideanPoint>(p).coords;
  double inv = 1.0 / (2.0 * sigma_ * sigma_);
  double q0 = (c[0] - mean0_[0]) * (c[0] - mean0_[0]) + (c[1] - mean0_[1]) * (c[1] - mean0_[1]);
  double q1 = (c[0] - mean1_[0]) * (c[0] - mean1_[0]) + (c[1] - mean1_[1]) * (c[1] - mean1_[1]);
  // Shift exponents for stability before forming the ratio.
  double m = std::min(q0, q1);
  double a0 = (1.0 - weight1_) * std::exp(-(q0 - m) * inv);
  double a1 = weight1_ * std::exp(-(q1 - m) * inv);
  return a1 / (a0 + a1);
}

MeasureValue GaussianMixture2DModel::ball_measure(const Point& center, double r,
                                                  bool closed) const {
  return mc_ball_measure(*this, oracle_seed_, center, r, closed);
}

double GaussianMixture2DModel::diameter_hint() const {
  double dx = mean1_[0] - mean0_[0], dy = mean1_[1] - mean0_[1];
  return std::sqrt(dx * dx + dy * dy) + 16.0 * sigma_;
}

// ---------------------------------------------------------------------- //
// HeisenbergCubeModel

HeisenbergCubeModel::HeisenbergCubeModel(double half_side, int mc_samples,
                                         std::uint64_t oracle_seed)
    : ProbabilityModel(HeisenbergSpace{}, "heisenberg_cube", mc_samples),
      half_side_(half_side),
      oracle_seed_(oracle_seed) {
  if (!(half_side_ > 0.0)) throw std::invalid_argument("heisenberg cube: side > 0");
}

Point HeisenbergCubeModel::sample(Rng& rng) const {
  double a = half_side_;
  return HeisPoint{rng.uniform(-a, a), rng.uniform(-a, a), rng.uniform(-a, a)};
}

MeasureValue HeisenbergCubeModel::ball_measure(const Point& center, double r,
                                               bool closed) const {
  return mc_ball_measure(*this, oracle_seed_, center, r, closed);
}

double HeisenbergCubeModel::diameter_hint() const {
  double a = half_side_;
  // |p^-1 q| with coordinates in the cube is bounded by the norm of the
  // extreme relative displacement.
  return 2.0 * heis_norm(HeisPoint{2 * a, 2 * a, 2 * a + 8 * a * a});
}

}  // namespace mklab
