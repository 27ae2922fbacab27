#include "mklab/knn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mklab/csv.hpp"
#include "mklab/measure_ops.hpp"

namespace mklab {

namespace {

std::vector<double> all_distances(const Space& space, const LabeledSample& sample,
                                  const Point& x) {
  std::vector<double> d(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    d[i] = distance(space, x, sample[i].x);
  }
  return d;
}

void check_k(const LabeledSample& sample, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > sample.size()) {
    throw std::invalid_argument("k out of range for sample of size " +
                                std::to_string(sample.size()));
  }
}

}  // namespace

double r_knn(const Space& space, const LabeledSample& sample, const Point& x, int k) {
  check_k(sample, k);
  std::vector<double> d = all_distances(space, sample, x);
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[k - 1];
}

NeighborSet select_neighbors(const Space& space, const LabeledSample& sample,
                             const Point& x, int k, TieBreakPolicy policy,
                             double query_z) {
  check_k(sample, k);
  std::vector<double> d = all_distances(space, sample, x);

  std::vector<double> sorted = d;
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  const double r = sorted[k - 1];

  NeighborSet out;
  out.radius = r;
  std::vector<int> tied;
  for (int i = 0; i < static_cast<int>(sample.size()); ++i) {
    if (d[i] < r) {
      out.indices.push_back(i);
    } else if (d[i] == r) {
      tied.push_back(i);
    }
  }
  int need = k - static_cast<int>(out.indices.size());
  // Order the sphere by the policy key; sample index breaks remaining ties.
  auto key = [&](int i) {
    switch (policy) {
      case TieBreakPolicy::ByIndex:
        return 0.0;
      case TieBreakPolicy::UniformRandom:
        return sample[i].z;
      case TieBreakPolicy::Dgkl:
        return std::fabs(sample[i].z - query_z);
    }
    return 0.0;
  };
  std::stable_sort(tied.begin(), tied.end(), [&](int a, int b) {
    double ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    return a < b;
  });
  out.indices.insert(out.indices.end(), tied.begin(), tied.begin() + need);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

int predict(const Space& space, const LabeledSample& sample, const Point& x, int k,
            TieBreakPolicy policy, double query_z) {
  NeighborSet nb = select_neighbors(space, sample, x, k, policy, query_z);
  int ones = 0;
  for (int i : nb.indices) ones += sample[i].y;
  return 2 * ones >= k ? 1 : 0;  // theta(mean - 1/2); split votes go to 1
}

double eta_n(const Space& space, const LabeledSample& sample, const Point& x, int k,
             TieBreakPolicy policy, double query_z) {
  NeighborSet nb = select_neighbors(space, sample, x, k, policy, query_z);
  int ones = 0;
  for (int i : nb.indices) ones += sample[i].y;
  return static_cast<double>(ones) / k;
}

double eta_star_n(const LabeledSample& sample, const ProbabilityModel& model,
                  const Point& x, int k) {
  check_k(sample, k);
  double alpha = static_cast<double>(k) / sample.size();
  double r = r_alpha(model, x, alpha);
  int ones = 0;
  for (const LabeledPoint& p : sample) {
    if (distance(model.space(), p.x, x) < r) ones += p.y;
  }
  return static_cast<double>(ones) / k;
}

double eta_star_extended(const LabeledSample& sample, const ProbabilityModel& model,
                         const Point& x, double z, int k) {
  check_k(sample, k);
  double alpha = static_cast<double>(k) / sample.size();
  BAlphaParts parts = b_alpha_parts(model, x, alpha);
  double b = b_alpha_adjust(parts.b_half, z);
  int ones = 0;
  for (const LabeledPoint& p : sample) {
    double d = distance(model.space(), p.x, x);
    bool in = d < parts.r || (d == parts.r && std::fabs(p.z - z) <= b);
    if (in) ones += p.y;
  }
  return static_cast<double>(ones) / k;
}

LabeledSample draw_sample(const LearningProblem& problem, int n, Rng& rng) {
  LabeledSample sample;
  sample.reserve(n);
  for (int i = 0; i < n; ++i) {
    Point x = problem.model->sample(rng);
    int y = rng.bernoulli(problem.eta(x));
    double z = rng.uniform01();
    sample.push_back(LabeledPoint{std::move(x), y, z});
  }
  return sample;
}

namespace {

void write_point_fields(std::ostream& os, const Point& p) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EuclideanPoint>) {
          for (std::size_t i = 0; i < v.coords.size(); ++i) {
            if (i) os << ',';
            os << format_real(v.coords[i]);
          }
        } else if constexpr (std::is_same_v<T, SeqPoint>) {
          os << v.symbols;
        } else if constexpr (std::is_same_v<T, NestedPoint>) {
          os << v.index;
        } else {
          os << format_real(v.x) << ',' << format_real(v.y) << ',' << format_real(v.z);
        }
      },
      p);
}

int point_field_count(const Space& space) {
  return std::visit(
      [](const auto& sp) -> int {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, EuclideanSpace>) {
          return sp.dim;
        } else if constexpr (std::is_same_v<T, HeisenbergSpace>) {
          return 3;
        } else {
          return 1;
        }
      },
      space);
}

}  // namespace

void write_sample_csv(std::ostream& os, const Space& space, const LabeledSample& sample) {
  std::visit(
      [&](const auto& sp) {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, EuclideanSpace>) {
          for (int i = 0; i < sp.dim; ++i) os << "x" << i << ",";
        } else if constexpr (std::is_same_v<T, UltrametricSeqSpace>) {
          os << "symbols,";
        } else if constexpr (std::is_same_v<T, NestedBallSpace>) {
          os << "index,";
        } else {
          os << "px,py,pz,";
        }
      },
      space);
  os << "y,z\n";
  for (const LabeledPoint& p : sample) {
    write_point_fields(os, p.x);
    os << ',' << p.y << ',' << format_real(p.z) << '\n';
  }
}

LabeledSample read_sample_csv(std::istream& is, const Space& space) {
  LabeledSample out;
  std::string line;
  if (!std::getline(is, line)) return out;  // header
  const int nf = point_field_count(space);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (static_cast<int>(fields.size()) != nf + 2) {
      throw std::invalid_argument("sample csv: bad field count in line: " + line);
    }
    LabeledPoint p;
    std::visit(
        [&](const auto& sp) {
          using T = std::decay_t<decltype(sp)>;
          if constexpr (std::is_same_v<T, EuclideanSpace>) {
            std::vector<double> c(sp.dim);
            for (int i = 0; i < sp.dim; ++i) c[i] = std::stod(fields[i]);
            p.x = EuclideanPoint{std::move(c)};
          } else if constexpr (std::is_same_v<T, UltrametricSeqSpace>) {
            p.x = SeqPoint{fields[0]};
          } else if constexpr (std::is_same_v<T, NestedBallSpace>) {
            p.x = NestedPoint{std::stoll(fields[0])};
          } else {
            p.x = HeisPoint{std::stod(fields[0]), std::stod(fields[1]),
                            std::stod(fields[2])};
          }
        },
        space);
    p.y = std::stoi(fields[nf]);
    p.z = std::stod(fields[nf + 1]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mklab
