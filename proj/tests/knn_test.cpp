#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mklab/knn.hpp"
#include "mklab/measure_ops.hpp"
#include "mklab/rng.hpp"

using namespace mklab;

namespace {

LabeledSample euclid_sample(const std::vector<double>& xs, const std::vector<int>& ys,
                            const std::vector<double>& zs) {
  LabeledSample s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s.push_back(LabeledPoint{euclidean({xs[i]}), ys[i], zs[i]});
  }
  return s;
}

LabeledSample random_tied_sample(Rng& rng, int n) {
  // Nested-ball points produce heavy exact ties.
  LabeledSample s;
  for (int i = 0; i < n; ++i) {
    s.push_back(LabeledPoint{nested(1 + static_cast<std::int64_t>(rng.below(6))),
                             static_cast<int>(rng.bits() & 1), rng.uniform01()});
  }
  return s;
}

}  // namespace

TEST(RKnn, OrderStatistics) {
  Space sp = EuclideanSpace{1};
  LabeledSample s = euclid_sample({1, 2, 3}, {0, 0, 0}, {0, 0, 0});
  EXPECT_DOUBLE_EQ(r_knn(sp, s, euclidean({0}), 2), 2.0);
  EXPECT_DOUBLE_EQ(r_knn(sp, s, euclidean({0}), 1), 1.0);
  EXPECT_DOUBLE_EQ(r_knn(sp, s, euclidean({0}), 3), 3.0);

  LabeledSample tied = euclid_sample({5, -5, 5, -5}, {0, 0, 0, 0}, {0, 0, 0, 0});
  for (int k = 1; k <= 4; ++k) {
    EXPECT_DOUBLE_EQ(r_knn(sp, tied, euclidean({0}), k), 5.0);
  }

  LabeledSample self = euclid_sample({0, 1}, {0, 0}, {0, 0});
  EXPECT_DOUBLE_EQ(r_knn(sp, self, euclidean({0}), 1), 0.0);

  EXPECT_THROW(r_knn(sp, s, euclidean({0}), 0), std::invalid_argument);
  EXPECT_THROW(r_knn(sp, s, euclidean({0}), 4), std::invalid_argument);
}

TEST(SelectNeighbors, NoTiesAllPoliciesAgree) {
  Space sp = EuclideanSpace{1};
  LabeledSample s = euclid_sample({0.1, 0.9, 0.4, 0.7}, {0, 1, 1, 0},
                                  {0.3, 0.9, 0.2, 0.8});
  Point x = euclidean({0.0});
  auto a = select_neighbors(sp, s, x, 2, TieBreakPolicy::ByIndex);
  auto b = select_neighbors(sp, s, x, 2, TieBreakPolicy::UniformRandom);
  auto c = select_neighbors(sp, s, x, 2, TieBreakPolicy::Dgkl, 0.77);
  EXPECT_EQ(a.indices, (std::vector<int>{0, 2}));
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.indices, c.indices);
}

TEST(SelectNeighbors, TiePolicies) {
  Space sp = EuclideanSpace{1};
  // three points all at distance 1
  LabeledSample s = euclid_sample({1, -1, 1}, {0, 1, 0}, {0.9, 0.1, 0.5});
  Point x = euclidean({0.0});

  auto by_index = select_neighbors(sp, s, x, 2, TieBreakPolicy::ByIndex);
  EXPECT_EQ(by_index.indices, (std::vector<int>{0, 1}));

  // smallest tie-break values first: z = 0.1 (idx 1), z = 0.5 (idx 2)
  auto uniform = select_neighbors(sp, s, x, 2, TieBreakPolicy::UniformRandom);
  EXPECT_EQ(uniform.indices, (std::vector<int>{1, 2}));

  // closest to the query's own z = 0.85: 0.9 (idx 0), then 0.5 (idx 2)
  auto dgkl = select_neighbors(sp, s, x, 2, TieBreakPolicy::Dgkl, 0.85);
  EXPECT_EQ(dgkl.indices, (std::vector<int>{0, 2}));
}

TEST(SelectNeighbors, ContractFuzz) {
  Space sp = NestedBallSpace{};
  Rng rng(51);
  for (int trial = 0; trial < 400; ++trial) {
    int n = 2 + static_cast<int>(rng.below(30));
    LabeledSample s = random_tied_sample(rng, n);
    Point x = nested(rng.below(7));
    int k = 1 + static_cast<int>(rng.below(n));
    TieBreakPolicy policy = static_cast<TieBreakPolicy>(rng.below(3));
    double qz = rng.uniform01();

    NeighborSet nb = select_neighbors(sp, s, x, k, policy, qz);
    ASSERT_EQ(static_cast<int>(nb.indices.size()), k);
    double r = r_knn(sp, s, x, k);
    ASSERT_DOUBLE_EQ(nb.radius, r);

    std::set<int> chosen(nb.indices.begin(), nb.indices.end());
    ASSERT_EQ(chosen.size(), nb.indices.size());  // no duplicates
    double max_d = 0.0;
    for (int i : nb.indices) {
      max_d = std::max(max_d, distance(sp, x, s[i].x));
    }
    ASSERT_LE(max_d, r);
    ASSERT_DOUBLE_EQ(max_d, r);  // someone sits on the tie sphere
    for (int i = 0; i < n; ++i) {
      if (distance(sp, x, s[i].x) < r) {
        ASSERT_TRUE(chosen.count(i));  // strictly closer points always selected
      }
    }
  }
}

TEST(Predict, MajorityAndSplit) {
  Space sp = EuclideanSpace{1};
  LabeledSample maj = euclid_sample({1, 1, 1}, {1, 1, 0}, {0, 0, 0});
  EXPECT_EQ(predict(sp, maj, euclidean({0}), 3, TieBreakPolicy::ByIndex), 1);

  LabeledSample split = euclid_sample({1, 1}, {1, 0}, {0, 0});
  EXPECT_EQ(predict(sp, split, euclidean({0}), 2, TieBreakPolicy::ByIndex), 1);

  LabeledSample zeros = euclid_sample({1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  EXPECT_EQ(predict(sp, zeros, euclidean({0}), 3, TieBreakPolicy::ByIndex), 0);
}

TEST(EtaN, MeanLabels) {
  Space sp = EuclideanSpace{1};
  LabeledSample s = euclid_sample({1, 2, 3, 4}, {1, 1, 0, 0}, {0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(eta_n(sp, s, euclidean({0}), 4, TieBreakPolicy::ByIndex), 0.5);
  LabeledSample ones = euclid_sample({1, 2}, {1, 1}, {0, 0});
  EXPECT_DOUBLE_EQ(eta_n(sp, ones, euclidean({0}), 2, TieBreakPolicy::ByIndex), 1.0);
  EXPECT_DOUBLE_EQ(eta_n(sp, s, euclidean({0}), 1, TieBreakPolicy::ByIndex), 1.0);
  LabeledSample nearest0 = euclid_sample({1, 2}, {0, 1}, {0, 0});
  EXPECT_DOUBLE_EQ(eta_n(sp, nearest0, euclidean({0}), 1, TieBreakPolicy::ByIndex), 0.0);
}

TEST(EtaStarN, CountsInsideMeasureRadius) {
  UniformCubeModel model(1);
  // empty ball
  LabeledSample far = euclid_sample({0.9, 0.95}, {1, 1}, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(eta_star_n(far, model, euclidean({0.1}), 1), 0.0);

  // exactly k strictly inside, all labelled 1
  LabeledSample in = euclid_sample({0.50, 0.51, 0.49, 0.9}, {1, 1, 1, 0},
                                   {0.5, 0.5, 0.5, 0.5});
  // k/n = 3/4 -> r = 3/8 around 0.5: the three near points are inside
  EXPECT_DOUBLE_EQ(eta_star_n(in, model, euclidean({0.5}), 3), 1.0);
}

TEST(EtaStarN, SeededUniformExampleMatchesRecount) {
  auto model = std::make_shared<UniformCubeModel>(1);
  LearningProblem problem{model, [](const Point&) { return 0.5; }, "const"};
  Rng rng(52);
  LabeledSample s = draw_sample(problem, 100, rng);
  const Point x = euclidean({0.5});
  const int k = 10;
  double r = r_alpha(*model, x, 0.1);
  ASSERT_DOUBLE_EQ(r, 0.05);
  // independent recount over the interval (0.45, 0.55)
  int ones = 0;
  for (const auto& p : s) {
    double v = std::get<EuclideanPoint>(p.x).coords[0];
    if (std::fabs(v - 0.5) < 0.05) ones += p.y;
  }
  EXPECT_DOUBLE_EQ(eta_star_n(s, *model, x, k), ones / 10.0);
}

TEST(EtaStarExtended, ReducesToPlainWithoutSphere) {
  auto model = std::make_shared<UniformCubeModel>(1);
  LearningProblem problem{model, [](const Point&) { return 0.7; }, "const"};
  Rng rng(53);
  LabeledSample s = draw_sample(problem, 200, rng);
  for (int k : {5, 20, 50}) {
    Point x = euclidean({0.37});
    EXPECT_DOUBLE_EQ(eta_star_extended(s, *model, x, 0.42, k),
                     eta_star_n(s, *model, x, k));
  }
}

TEST(EtaStarExtended, DiracBandSelection) {
  // All mass on one atom; membership is decided purely by the z band.
  ModelPtr model = make_dirac_model(euclidean({0.0}));
  LearningProblem problem{model, [](const Point&) { return 0.6; }, "const"};
  Rng rng(54);
  const int n = 400, k = 100;
  LabeledSample s = draw_sample(problem, n, rng);
  const double z = 0.5;
  double alpha = static_cast<double>(k) / n;
  double b = b_alpha(*model, euclidean({0.0}), z, alpha);
  ASSERT_DOUBLE_EQ(b, alpha / 2.0);  // r_alpha = 0, sphere mass 1
  // independent recount of the band
  int ones = 0, count = 0;
  for (const auto& p : s) {
    if (std::fabs(p.z - z) <= b) {
      ++count;
      ones += p.y;
    }
  }
  EXPECT_NEAR(count, k, 3.0 * std::sqrt(static_cast<double>(k)));
  EXPECT_DOUBLE_EQ(eta_star_extended(s, *model, euclidean({0.0}), z, k),
                   static_cast<double>(ones) / k);
}

TEST(EtaStarExtended, EmptyBallAndBand) {
  auto model = std::make_shared<UniformCubeModel>(1);
  LabeledSample s = euclid_sample({0.9, 0.92, 0.94}, {1, 1, 1}, {0.1, 0.2, 0.3});
  EXPECT_DOUBLE_EQ(eta_star_extended(s, *model, euclidean({0.1}), 0.5, 1), 0.0);
}

// The count version of the eta*/eta_n comparison: with all labels 1, equality
// holds whenever the k-NN ball holds exactly k points; with arbitrary labels
// the count expression is an upper bound.
TEST(EtaBound, IdentityOnAtomlessSamples) {
  auto model = std::make_shared<UniformCubeModel>(1);
  Space sp = EuclideanSpace{1};
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 40 + static_cast<int>(rng.below(100));
    int k = 1 + static_cast<int>(rng.below(20));
    LabeledSample s;
    for (int i = 0; i < n; ++i) {
      s.push_back(LabeledPoint{model->sample(rng), static_cast<int>(rng.bits() & 1),
                               rng.uniform01()});
    }
    Point x = model->sample(rng);
    double r = r_knn(sp, s, x, k);
    int at_radius = 0;
    for (const auto& p : s) {
      if (distance(sp, p.x, x) <= r) ++at_radius;
    }
    if (at_radius != k) continue;  // atomless: never happens in practice

    double r_kn = r_alpha(*model, x, static_cast<double>(k) / n);
    double count_term = 0.0;
    for (const auto& p : s) {
      if (distance(sp, p.x, x) < r_kn) count_term += 1.0;
    }
    count_term = std::fabs(count_term / k - 1.0);

    // all-ones labels: exact identity
    LabeledSample ones = s;
    for (auto& p : ones) p.y = 1;
    double lhs_ones = std::fabs(eta_star_n(ones, *model, x, k) -
                                eta_n(sp, ones, x, k, TieBreakPolicy::ByIndex));
    ASSERT_DOUBLE_EQ(lhs_ones, count_term);

    // general labels: bounded by the count expression
    double lhs = std::fabs(eta_star_n(s, *model, x, k) -
                           eta_n(sp, s, x, k, TieBreakPolicy::ByIndex));
    ASSERT_LE(lhs, count_term + 1e-12);
  }
}

// E |hat-eta_n - 1| <= 1 / sqrt(k), the variance step of the consistency
// argument, checked empirically with the constant-one regression function.
TEST(EtaBound, EmpiricalVarianceBound) {
  auto model = std::make_shared<UniformCubeModel>(1);
  LearningProblem ones{model, [](const Point&) { return 1.0; }, "const"};
  Rng rng(56);
  const int trials = 250, n = 200, k = 20;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    LabeledSample s = draw_sample(ones, n, rng);
    Point x = model->sample(rng);
    double v = std::fabs(eta_star_n(s, *model, x, k) - 1.0);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / trials;
  double sd = std::sqrt(std::max(0.0, sum2 / trials - mean * mean));
  EXPECT_LE(mean, 1.0 / std::sqrt(static_cast<double>(k)) + 3.0 * sd / std::sqrt(trials));
}

TEST(SampleCsv, RoundTrip) {
  Space sp = EuclideanSpace{2};
  LabeledSample s;
  Rng rng(57);
  for (int i = 0; i < 20; ++i) {
    s.push_back(LabeledPoint{euclidean({rng.normal(), rng.normal()}),
                             static_cast<int>(rng.bits() & 1), rng.uniform01()});
  }
  std::stringstream ss;
  write_sample_csv(ss, sp, s);
  LabeledSample back = read_sample_csv(ss, sp);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_TRUE(same_point(back[i].x, s[i].x));
    ASSERT_EQ(back[i].y, s[i].y);
    ASSERT_DOUBLE_EQ(back[i].z, s[i].z);
  }

  Space nsp = NestedBallSpace{};
  LabeledSample ns;
  for (int i = 0; i < 10; ++i) {
    ns.push_back(LabeledPoint{nested(rng.below(40)), 1, rng.uniform01()});
  }
  std::stringstream ss2;
  write_sample_csv(ss2, nsp, ns);
  LabeledSample back2 = read_sample_csv(ss2, nsp);
  ASSERT_EQ(back2.size(), ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    ASSERT_TRUE(same_point(back2[i].x, ns[i].x));
  }
}
