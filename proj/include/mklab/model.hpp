#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mklab/rng.hpp"
#include "mklab/space.hpp"

namespace mklab {

// Measure value from an oracle.  Exact oracles report std_error = 0.
struct MeasureValue {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
};

struct Atom {
  Point point;
  double mass = 0.0;
};

// A probability measure on one of the supported spaces, with a sampler and a
// ball-measure oracle.  Models are immutable after construction and safe for
// concurrent use; Monte-Carlo oracles derive their randomness from the
// oracle seed and the query, so repeated calls agree.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  const Space& space() const { return space_; }
  const std::string& name() const { return name_; }
  int mc_samples() const { return mc_samples_; }

  virtual Point sample(Rng& rng) const = 0;

  // mu(B(center, r)) for the open or closed ball; r = infinity gives 1.
  virtual MeasureValue ball_measure(const Point& center, double r, bool closed) const = 0;

  virtual bool exact_oracle() const = 0;

  // Closed-form r_alpha where the model has one; nullopt falls back to the
  // generic solver in measure_ops.
  virtual std::optional<double> r_alpha_closed_form(const Point& /*x*/,
                                                    double /*alpha*/) const {
    return std::nullopt;
  }

  // Finite atom list when the measure is purely atomic with finitely many
  // atoms; nullptr otherwise.
  virtual const std::vector<Atom>* atoms() const { return nullptr; }

  // Exact integral of f over the open ball B(x, r), when the model can
  // compute one (the value is the unnormalized integral, not the average).
  virtual std::optional<double> ball_integral(
      const Point& /*x*/, double /*r*/,
      const std::function<double(const Point&)>& /*f*/) const {
    return std::nullopt;
  }

  // Upper bound for the metric diameter of the support; used to bracket
  // radius searches.
  virtual double diameter_hint() const = 0;

 protected:
  ProbabilityModel(Space space, std::string name, int mc_samples)
      : space_(std::move(space)), name_(std::move(name)), mc_samples_(mc_samples) {}

  Space space_;
  std::string name_;
  int mc_samples_ = 100000;
};

using ModelPtr = std::shared_ptr<const ProbabilityModel>;

// A supervised binary problem: marginal measure plus regression function
// eta(x) = P[Y = 1 | X = x] with values in [0, 1].
struct LearningProblem {
  ModelPtr model;
  std::function<double(const Point&)> eta;
  std::string eta_name;
};

// ---------------------------------------------------------------------------

// Finitely many atoms; exact oracle by summation.
class FiniteDiscreteModel : public ProbabilityModel {
 public:
  FiniteDiscreteModel(Space space, std::vector<Atom> atoms, std::string name = "discrete");

  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return true; }
  const std::vector<Atom>* atoms() const override { return &atoms_; }
  std::optional<double> ball_integral(
      const Point& x, double r, const std::function<double(const Point&)>& f) const override;
  double diameter_hint() const override;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

ModelPtr make_dirac_model(Point at);

// The nested-ball measure: mu{x_n} = 1/n - 1/(n+1) = 1/(n(n+1)) for n >= 1
// and mu{x_0} = 0.  Tail sums telescope (sum_{m >= M} mass = 1/M), so every
// ball measure is an exact closed form.
class NestedBallModel : public ProbabilityModel {
 public:
  explicit NestedBallModel(NestedBallSpace space = {});

  const NestedBallSpace& nested_space() const { return nested_; }
  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return true; }
  std::optional<double> r_alpha_closed_form(const Point& x, double alpha) const override;
  std::optional<double> ball_integral(
      const Point& x, double r, const std::function<double(const Point&)>& f) const override;
  double diameter_hint() const override { return 2.0; }

  static double atom_mass(std::int64_t n);  // 1/(n(n+1)); 0 for n = 0
  static double tail_mass(std::int64_t from);  // sum_{m >= from} = 1/from

  // Every ball of this space consists of: a contiguous index range, possibly
  // the center atom on its own, possibly a full tail {x_m : m >= tail_from},
  // and possibly the limit point x_0.  Keeping the range symbolic lets the
  // measure be evaluated canonically (telescoping in extended precision), so
  // mathematically equal ball masses round to identical doubles; the b_alpha
  // case analysis sits exactly on those equalities.
  struct BallContents {
    std::int64_t range_first = 1, range_last = 0;  // empty when last < first
    std::int64_t self_index = 0;                   // 0 = center not separate
    std::int64_t tail_from = 0;                    // 0 = no tail
    bool contains_limit = false;
  };
  BallContents ball_contents(const Point& center, double r, bool closed) const;

 private:
  NestedBallSpace nested_;
};

// Uniform measure on the Cantor space {0,1}^N carried by the ultrametric
// d(x,y) = 2^-(first differing position).  Sampled points are truncated to
// `depth` symbols; ball measures are the exact infinite-space values 2^-m.
class CantorUniformModel : public ProbabilityModel {
 public:
  explicit CantorUniformModel(int depth = 64);

  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return true; }
  std::optional<double> r_alpha_closed_form(const Point& x, double alpha) const override;
  double diameter_hint() const override { return 1.0; }

 private:
  int depth_;
};

// Uniform measure on [0,1]^d.  Exact ball measures for d <= 2 (interval
// length, disk/square intersection area); Monte-Carlo for d >= 3.
class UniformCubeModel : public ProbabilityModel {
 public:
  UniformCubeModel(int dim, int mc_samples = 100000, std::uint64_t oracle_seed = 9001);

  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return dim_ <= 2; }
  std::optional<double> r_alpha_closed_form(const Point& x, double alpha) const override;
  std::optional<double> ball_integral(
      const Point& x, double r, const std::function<double(const Point&)>& f) const override;
  double diameter_hint() const override { return std::sqrt(static_cast<double>(dim_)); }

 private:
  int dim_;
  std::uint64_t oracle_seed_;
};

// Area of the intersection of the disk around (cx, cy) with [0,1]^2, by
// closed-form piecewise integration.  Exposed for testing.
double disk_unit_square_area(double cx, double cy, double r);

// Two isotropic Gaussian components in the plane with weights (w, 1-w).
// The ball oracle is Monte-Carlo; the posterior P[component 1 | x] serves as
// the regression function of the classic mixture problem.
class GaussianMixture2DModel : public ProbabilityModel {
 public:
  GaussianMixture2DModel(std::array<double, 2> mean0, std::array<double, 2> mean1,
                         double sigma, double weight1 = 0.5, int mc_samples = 100000,
                         std::uint64_t oracle_seed = 9001);

  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return false; }
  double diameter_hint() const override;

  double posterior1(const Point& x) const;
  double density(double x, double y) const;
  const std::array<double, 2>& mean0() const { return mean0_; }
  const std::array<double, 2>& mean1() const { return mean1_; }
  double sigma() const { return sigma_; }
  double weight1() const { return weight1_; }

 private:
  std::array<double, 2> mean0_;
  std::array<double, 2> mean1_;
  double sigma_;
  double weight1_;
  std::uint64_t oracle_seed_;
};

// Uniform density on the cube [-half_side, half_side]^3 viewed inside the
// Heisenberg group with the Cygan-Koranyi metric.  Monte-Carlo oracle only.
class HeisenbergCubeModel : public ProbabilityModel {
 public:
  explicit HeisenbergCubeModel(double half_side = 1.0, int mc_samples = 100000,
                               std::uint64_t oracle_seed = 9001);

  Point sample(Rng& rng) const override;
  MeasureValue ball_measure(const Point& center, double r, bool closed) const override;
  bool exact_oracle() const override { return false; }
  double diameter_hint() const override;

 private:
  double half_side_;
  std::uint64_t oracle_seed_;
};

}  // namespace mklab
